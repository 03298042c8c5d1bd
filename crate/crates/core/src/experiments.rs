//! Experiment orchestration: parallel parameter sweeps, disorder averaging,
//! figure-data emission, and the CSV/manifest output contract.
//!
//! Determinism: every scan point (and every disorder sample) is an
//! independent task whose seed derives from (base_seed, point index, sample
//! index); aggregation folds results in index order, so outputs are
//! byte-identical for a given config regardless of worker count.

use crate::config::{RunConfig, ScanAxis};
use crate::disorder::{sample_disorder, task_seed};
use crate::error::{Error, Result};
use crate::evolve::{evolve, DrivenChain};
use crate::lindblad::evolve_open;
use crate::probes::{berry_curvature_dynamical, chern_number, generalized_force};
use crate::schedule::{HRule, RampProtocol};
use crate::spin::{diagonalize, MagneticField, HamiltonianParts};
use crate::units::{to_mhz, PI};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// One resolved scan point: fixed couplings, drive amplitude, protocol.
#[derive(Clone)]
pub struct PointSpec {
    pub chain: ChainData,
    pub h_amp: f64,
    pub protocol: RampProtocol,
}

/// Plain-data mirror of `DrivenChain` (clonable across tasks).
#[derive(Clone)]
pub struct ChainData {
    pub n: usize,
    pub bonds: Vec<crate::circuit::CouplingStrengths>,
}

impl ChainData {
    pub fn driven(&self) -> Result<DrivenChain> {
        DrivenChain::new(self.n, self.bonds.clone())
    }
}

/// Resolve a control value on the configured scan axis into a point spec.
pub fn resolve_point(cfg: &RunConfig, control: f64) -> Result<PointSpec> {
    let base = cfg.protocol()?;
    let (chain, h_amp, protocol) = match cfg.scan.axis {
        ScanAxis::IBOverIcr | ScanAxis::JbarOverH => {
            let (chain, h) = cfg.resolve_chain(Some(control))?;
            let mut p = base;
            p.h_rule = HRule::Constant(h);
            (chain, h, p)
        }
        ScanAxis::TRampNs => {
            let (chain, h) = cfg.resolve_chain(None)?;
            let mut p = base;
            p.v = PI / control;
            p.h_rule = HRule::Constant(h);
            (chain, h, p)
        }
        ScanAxis::Theta => {
            let (chain, h) = cfg.resolve_chain(None)?;
            let mut p = RampProtocol::new(base.v, control, HRule::Constant(h))?
                .with_phi(base.phi)
                .with_measurement(base.t_meas, base.window);
            p.h_rule = HRule::Constant(h);
            (chain, h, p)
        }
    };
    Ok(PointSpec {
        chain: ChainData {
            n: chain.n,
            bonds: chain.bonds,
        },
        h_amp,
        protocol,
    })
}

/// Berry curvature of one point, closed or open per the config, with
/// optional quenched disorder multipliers.
pub fn curvature_at(cfg: &RunConfig, point: &PointSpec, alpha: Option<(f64, f64)>) -> Result<f64> {
    let (bonds, h_amp) = match alpha {
        Some((a1, a2)) => (
            point.chain.bonds.iter().map(|b| b.scaled(a1)).collect(),
            point.h_amp * a2,
        ),
        None => (point.chain.bonds.clone(), point.h_amp),
    };
    let chain = DrivenChain::new(point.chain.n, bonds)?;
    let mut protocol = point.protocol;
    protocol.h_rule = HRule::Constant(h_amp);
    let evolver = cfg.evolver.config();
    if cfg.decoherence.enabled {
        let d = cfg.decoherence.params(cfg.omega_q())?;
        let traj = evolve_open(&chain, &protocol, &d, &evolver)?;
        let m = generalized_force(&traj.sigma_y_expectations, h_amp, protocol.theta_final)?;
        Ok(m / protocol.v_theta_at_end())
    } else {
        let traj = evolve(&chain, &protocol, &evolver)?;
        Ok(berry_curvature_dynamical(&traj, &protocol, h_amp)?.f_theta_phi)
    }
}

/// Chern number of one point from the dynamical protocol: the same ramp is
/// re-run to every interior angle of a theta grid and trapezoid-integrated.
pub fn chern_at(cfg: &RunConfig, point: &PointSpec, alpha: Option<(f64, f64)>, grid: usize) -> Result<f64> {
    let sampler = |theta: f64| -> Result<f64> {
        let mut p = RampProtocol::new(point.protocol.v, theta, point.protocol.h_rule)?
            .with_phi(point.protocol.phi)
            .with_measurement(point.protocol.t_meas, point.protocol.window);
        p.h_rule = point.protocol.h_rule;
        let sub = PointSpec {
            chain: point.chain.clone(),
            h_amp: point.h_amp,
            protocol: p,
        };
        curvature_at(cfg, &sub, alpha)
    };
    Ok(chern_number(sampler, grid)?.ch)
}

/// Simple column table with a deterministic CSV rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn new(columns: &[&str]) -> Self {
        ScanTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv_string())
    }

    /// (control, value) pairs from two columns.
    pub fn curve(&self, x_col: usize, y_col: usize) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r[x_col], r[y_col])).collect()
    }
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
    }
    std::fs::write(path, content).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// F along the configured scan axis (columns: control, F, per-qubit sums).
pub fn scan_curve(cfg: &RunConfig) -> Result<ScanTable> {
    let grid = cfg.scan.grid();
    let results: Result<Vec<f64>> = grid
        .par_iter()
        .map(|&x| {
            let point = resolve_point(cfg, x)?;
            curvature_at(cfg, &point, None)
        })
        .collect();
    let values = results?;
    let mut table = ScanTable::new(&[cfg.scan.axis_label(), "F"]);
    for (x, f) in grid.iter().zip(values) {
        table.rows.push(vec![*x, f]);
    }
    Ok(table)
}

/// Energy gap at the measurement angle along the scan axis.
pub fn gap_curve(cfg: &RunConfig) -> Result<ScanTable> {
    let grid = cfg.scan.grid();
    let results: Result<Vec<f64>> = grid
        .par_iter()
        .map(|&x| {
            let point = resolve_point(cfg, x)?;
            let parts = HamiltonianParts::new(point.chain.n, &point.chain.bonds)?;
            let field = MagneticField::new(
                point.h_amp,
                point.protocol.theta_final,
                point.protocol.phi,
            );
            Ok(diagonalize(&parts.assemble(&field))?.gap)
        })
        .collect();
    let gaps = results?;
    let mut table = ScanTable::new(&[cfg.scan.axis_label(), "gap_MHz"]);
    for (x, g) in grid.iter().zip(gaps) {
        table.rows.push(vec![*x, to_mhz(g)]);
    }
    Ok(table)
}

/// Coupling strengths versus bias current (the tunable-coupler curve).
pub fn couplings_curve(cfg: &RunConfig) -> Result<ScanTable> {
    let p = cfg.circuit.params();
    let grid = cfg.scan.grid();
    let mut table = ScanTable::new(&["I_b_over_Icr", "Jx_MHz", "Jz_MHz", "Jz_over_Jx"]);
    for &x in &grid {
        let j = crate::circuit::couplings(&p, x * p.i_cr)?;
        table
            .rows
            .push(vec![x, to_mhz(j.jx), to_mhz(j.jz), j.jz / j.jx]);
    }
    Ok(table)
}

/// Berry curvature versus theta at the configured fixed point, plus the
/// accumulated Chern number (columns: theta_rad, F, Ch_partial).
pub fn chern_curve(cfg: &RunConfig, grid_size: usize) -> Result<(ScanTable, f64)> {
    let control = match cfg.scan.axis {
        ScanAxis::Theta | ScanAxis::TRampNs => 0.0,
        _ => cfg
            .chain
            .jbar_over_h
            .or(cfg.chain.i_b_over_icr)
            .unwrap_or(cfg.scan.min),
    };
    let point = match cfg.scan.axis {
        ScanAxis::IBOverIcr | ScanAxis::JbarOverH => resolve_point(cfg, control)?,
        _ => {
            let (chain, h) = cfg.resolve_chain(None)?;
            let base = cfg.protocol()?;
            let mut p = base;
            p.h_rule = HRule::Constant(h);
            PointSpec {
                chain: ChainData {
                    n: chain.n,
                    bonds: chain.bonds,
                },
                h_amp: h,
                protocol: p,
            }
        }
    };
    // sample interior angles in parallel
    let thetas: Vec<f64> = (0..grid_size)
        .map(|k| PI * k as f64 / (grid_size - 1) as f64)
        .collect();
    let values: Result<Vec<f64>> = thetas
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            if k == 0 || k == grid_size - 1 {
                return Ok(0.0);
            }
            let mut p = RampProtocol::new(point.protocol.v, theta, point.protocol.h_rule)?
                .with_phi(point.protocol.phi)
                .with_measurement(point.protocol.t_meas, point.protocol.window);
            p.h_rule = point.protocol.h_rule;
            let sub = PointSpec {
                chain: point.chain.clone(),
                h_amp: point.h_amp,
                protocol: p,
            };
            curvature_at(cfg, &sub, None)
        })
        .collect();
    let values = values?;
    let mut table = ScanTable::new(&["theta_rad", "F", "Ch_partial"]);
    let mut acc = 0.0;
    for k in 0..grid_size {
        if k > 0 {
            acc += 0.5 * (thetas[k] - thetas[k - 1]) * (values[k] + values[k - 1]);
        }
        table.rows.push(vec![thetas[k], values[k], acc]);
    }
    Ok((table, acc))
}

/// Disorder-averaged curve. Per scan point, `n_alpha` quenched realizations
/// are evaluated; failed samples are excluded and counted, and more than 1%
/// failures aborts the sweep.
pub fn disorder_curve(cfg: &RunConfig) -> Result<ScanTable> {
    let grid = cfg.scan.grid();
    let n_alpha = cfg.disorder.n_alpha;
    let eta = cfg.disorder.eta;
    let with_chern = cfg.scan.chern_grid > 0;

    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..n_alpha).map(move |s| (p, s)))
        .collect();
    let outcomes: Vec<(usize, usize, Option<(f64, Option<f64>)>)> = tasks
        .par_iter()
        .map(|&(pi, si)| {
            let run = || -> Result<(f64, Option<f64>)> {
                let point = resolve_point(cfg, grid[pi])?;
                let a = sample_disorder(eta, task_seed(cfg.disorder.base_seed, pi as u64, 0), si as u64);
                let alpha = Some((a.alpha1, a.alpha2));
                let f = curvature_at(cfg, &point, alpha)?;
                let ch = if with_chern {
                    Some(chern_at(cfg, &point, alpha, cfg.scan.chern_grid)?)
                } else {
                    None
                };
                Ok((f, ch))
            };
            (pi, si, run().ok())
        })
        .collect();

    let total = tasks.len();
    let failed = outcomes.iter().filter(|(_, _, r)| r.is_none()).count();
    if failed * 100 > total {
        return Err(Error::TooManyFailures { failed, total });
    }

    let mut columns = vec![cfg.scan.axis_label(), "F_mean", "F_stderr", "samples", "failed"];
    if with_chern {
        columns.push("Ch_mean");
        columns.push("Ch_stderr");
    }
    let mut table = ScanTable::new(&columns);
    for (pi, &x) in grid.iter().enumerate() {
        // fold in sample order for reproducibility
        let mut fs: Vec<f64> = Vec::with_capacity(n_alpha);
        let mut chs: Vec<f64> = Vec::with_capacity(if with_chern { n_alpha } else { 0 });
        for si in 0..n_alpha {
            if let Some((f, ch)) = &outcomes[pi * n_alpha + si].2 {
                fs.push(*f);
                if let Some(c) = ch {
                    chs.push(*c);
                }
            }
        }
        let (mean, se) = mean_stderr(&fs);
        let mut row = vec![
            x,
            mean,
            se,
            fs.len() as f64,
            (n_alpha - fs.len()) as f64,
        ];
        if with_chern {
            let (chm, chse) = mean_stderr(&chs);
            row.push(chm);
            row.push(chse);
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Velocity-limit curve: F and M versus ramp time at a fixed working point.
pub fn ramp_time_curve(cfg: &RunConfig) -> Result<ScanTable> {
    let grid = cfg.scan.grid();
    let results: Result<Vec<(f64, f64)>> = grid
        .par_iter()
        .map(|&t_ramp| {
            let point = resolve_point(cfg, t_ramp)?;
            let f = curvature_at(cfg, &point, None)?;
            let m = f * point.protocol.v_theta_at_end();
            Ok((f, m))
        })
        .collect();
    let results = results?;
    let mut table = ScanTable::new(&["t_ramp_ns", "v_rad_per_ns", "F", "M_rad_per_ns"]);
    for (&t, (f, m)) in grid.iter().zip(results) {
        table.rows.push(vec![t, PI / t, f, m]);
    }
    Ok(table)
}

/// Run manifest written next to the CSV outputs. The CSV files are
/// byte-identical across reruns of the same config; the manifest's wall time
/// is the one field that varies.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub code_version: String,
    pub seed: u64,
    pub wall_time_ms: u128,
    pub files: Vec<String>,
    pub configs: BTreeMap<String, RunConfig>,
}

impl Manifest {
    pub fn new(seed: u64) -> Self {
        Manifest {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            wall_time_ms: 0,
            files: Vec::new(),
            configs: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        write_text(&path, &body)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ChainMode, ScanConfig};

    fn tiny_direct_config() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.chain.mode = ChainMode::Direct;
        cfg.ramp.t_ramp_ns = Some(20.0);
        cfg.scan = ScanConfig {
            axis: crate::config::ScanAxis::JbarOverH,
            min: 0.2,
            max: 0.8,
            points: 4,
            chern_grid: 0,
        };
        cfg
    }

    #[test]
    fn scan_curve_shows_both_plateaus() {
        let cfg = tiny_direct_config();
        let table = scan_curve(&cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        let first = table.rows[0][1];
        let last = table.rows[3][1];
        assert!((first - 1.0).abs() < 0.05, "weak side F = {first}");
        assert!(last.abs() < 0.05, "strong side F = {last}");
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let mut cfg = tiny_direct_config();
        cfg.disorder.eta = 0.05;
        cfg.disorder.n_alpha = 8;
        let a = disorder_curve(&cfg).unwrap().to_csv_string();
        let b = disorder_curve(&cfg).unwrap().to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn results_independent_of_thread_count() {
        let mut cfg = tiny_direct_config();
        cfg.disorder.eta = 0.05;
        cfg.disorder.n_alpha = 6;
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| disorder_curve(&cfg).unwrap().to_csv_string());
        let b = pool4.install(|| disorder_curve(&cfg).unwrap().to_csv_string());
        assert_eq!(a, b);
    }

    #[test]
    fn zero_disorder_matches_deterministic_curve() {
        let mut cfg = tiny_direct_config();
        cfg.disorder.eta = 0.0;
        cfg.disorder.n_alpha = 3;
        let det = scan_curve(&cfg).unwrap();
        let dis = disorder_curve(&cfg).unwrap();
        for (a, b) in det.rows.iter().zip(&dis.rows) {
            assert!((a[1] - b[1]).abs() < 1e-12);
            assert_eq!(b[2], 0.0); // zero spread
        }
    }

    #[test]
    fn disorder_stderr_scales_as_inverse_sqrt() {
        // single point, three sample counts; stderr ~ 1/sqrt(N) within 20%
        let mut cfg = tiny_direct_config();
        cfg.scan.points = 1;
        cfg.scan.min = 0.3;
        cfg.scan.max = 0.3;
        cfg.ramp.t_ramp_ns = Some(10.0);
        cfg.disorder.eta = 0.10;
        let mut ses = Vec::new();
        for n in [125usize, 500, 2000] {
            cfg.disorder.n_alpha = n;
            let t = disorder_curve(&cfg).unwrap();
            ses.push(t.rows[0][2]);
        }
        let r1 = ses[0] / ses[1];
        let r2 = ses[1] / ses[2];
        let expect = 2.0; // sqrt(4)
        assert!((r1 / expect - 1.0).abs() < 0.2, "ratio {r1}");
        assert!((r2 / expect - 1.0).abs() < 0.2, "ratio {r2}");
    }

    #[test]
    fn couplings_table_columns() {
        let mut cfg = RunConfig::default();
        cfg.scan.points = 5;
        cfg.scan.max = 0.8;
        let t = couplings_curve(&cfg).unwrap();
        assert_eq!(t.columns[3], "Jz_over_Jx");
        assert!(t.rows.iter().all(|r| r.len() == 4));
        // Jx decreasing
        assert!(t.rows[0][1] > t.rows[4][1]);
    }

    #[test]
    fn gap_curve_minimum_sits_at_the_transition() {
        let mut cfg = tiny_direct_config();
        cfg.scan = ScanConfig {
            axis: crate::config::ScanAxis::JbarOverH,
            min: 0.3,
            max: 0.7,
            points: 41,
            chern_grid: 0,
        };
        let t = gap_curve(&cfg).unwrap();
        let (kmin, _) = t
            .rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1[1].partial_cmp(&b.1[1]).unwrap())
            .unwrap();
        let loc = t.rows[kmin][0];
        assert!((loc - 0.5).abs() <= cfg.scan.spacing() + 1e-12, "gap min at {loc}");
    }

    #[test]
    fn csv_rendering_is_stable() {
        let mut t = ScanTable::new(&["a", "b"]);
        t.rows.push(vec![0.5, 1.0 / 3.0]);
        let s = t.to_csv_string();
        assert_eq!(s, "a,b\n0.5,0.3333333333333333\n");
    }
}
