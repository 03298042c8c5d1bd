//! Figure presets: canned configurations that regenerate the reference
//! datasets (coupling curve, plateau scans, staircases, velocity limit,
//! disorder robustness) as CSV files plus a JSON manifest.

use crate::config::{ChainMode, RunConfig, ScanAxis, ScanConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    couplings_curve, disorder_curve, gap_curve, ramp_time_curve, resolve_point, scan_curve,
    Manifest, ScanTable,
};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
    Fig4e,
    Fig5,
    Fig6a,
    Fig6b,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fig2" => Preset::Fig2,
            "fig4a" => Preset::Fig4a,
            "fig4b" => Preset::Fig4b,
            "fig4c" => Preset::Fig4c,
            "fig4d" => Preset::Fig4d,
            "fig4e" => Preset::Fig4e,
            "fig5" => Preset::Fig5,
            "fig6a" => Preset::Fig6a,
            "fig6b" => Preset::Fig6b,
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (expected fig2|fig4a|fig4b|fig4c|fig4d|fig4e|fig5|fig6a|fig6b)"
                )))
            }
        })
    }
}

impl Preset {
    pub const ALL: [Preset; 9] = [
        Preset::Fig2,
        Preset::Fig4a,
        Preset::Fig4b,
        Preset::Fig4c,
        Preset::Fig4d,
        Preset::Fig4e,
        Preset::Fig5,
        Preset::Fig6a,
        Preset::Fig6b,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig4c => "fig4c",
            Preset::Fig4d => "fig4d",
            Preset::Fig4e => "fig4e",
            Preset::Fig5 => "fig5",
            Preset::Fig6a => "fig6a",
            Preset::Fig6b => "fig6b",
        }
    }
}

fn base_circuit_scan(n: usize, h_mhz: f64, points: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.chain.n = n;
    cfg.chain.mode = ChainMode::Circuit;
    cfg.ramp.t_ramp_ns = Some(100.0);
    cfg.ramp.h_mhz = Some(h_mhz);
    cfg.scan = ScanConfig {
        axis: ScanAxis::IBOverIcr,
        min: 0.0,
        max: 0.90,
        points,
        chern_grid: 0,
    };
    cfg
}

fn base_direct_scan(n: usize, h_mhz: f64, min: f64, max: f64, points: usize) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.chain.n = n;
    cfg.chain.mode = ChainMode::Direct;
    cfg.ramp.t_ramp_ns = Some(100.0);
    cfg.ramp.h_mhz = Some(h_mhz);
    cfg.scan = ScanConfig {
        axis: ScanAxis::JbarOverH,
        min,
        max,
        points,
        chern_grid: 0,
    };
    cfg
}

fn staircase_direct(n: usize, max: f64) -> RunConfig {
    let mut cfg = base_direct_scan(n, 0.0, 0.02, max, 41);
    cfg.ramp.h_mhz = None;
    cfg.ramp.h_rule = Some(crate::config::LinearRule { a: -85.0, b: 3400.0 });
    cfg
}

/// Keep only grid points the config can resolve (the linear h-rule turns
/// negative above Jbar = 40 MHz on the bias axis).
fn valid_grid(cfg: &RunConfig) -> Vec<f64> {
    cfg.scan
        .grid()
        .into_iter()
        .filter(|&x| resolve_point(cfg, x).is_ok())
        .collect()
}

fn scan_over(cfg: &RunConfig, grid: &[f64]) -> Result<ScanTable> {
    let mut sub = cfg.clone();
    let mut table = ScanTable::new(&[cfg.scan.axis_label(), "F"]);
    for &x in grid {
        sub.scan.min = x;
        sub.scan.max = x;
        sub.scan.points = 1;
        let t = scan_curve(&sub)?;
        table.rows.extend(t.rows);
    }
    Ok(table)
}

struct Emitter<'a> {
    dir: &'a Path,
    manifest: Manifest,
    started: Instant,
}

impl<'a> Emitter<'a> {
    fn new(dir: &'a Path, seed: u64) -> Self {
        Emitter {
            dir,
            manifest: Manifest::new(seed),
            started: Instant::now(),
        }
    }

    fn emit(&mut self, name: &str, cfg: &RunConfig, table: &ScanTable) -> Result<()> {
        let path = self.dir.join(name);
        table.write(&path)?;
        self.manifest.files.push(name.to_string());
        self.manifest.configs.insert(name.to_string(), cfg.clone());
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<PathBuf>> {
        self.manifest.wall_time_ms = self.started.elapsed().as_millis();
        let mut files: Vec<PathBuf> = self
            .manifest
            .files
            .iter()
            .map(|f| self.dir.join(f))
            .collect();
        files.push(self.manifest.write(self.dir)?);
        Ok(files)
    }
}

/// Run one preset, writing its CSV panels and manifest under `out_dir`.
pub fn run_preset(preset: Preset, out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut em = Emitter::new(out_dir, seed);
    match preset {
        Preset::Fig2 => {
            let mut cfg = RunConfig::default();
            cfg.scan = ScanConfig {
                axis: ScanAxis::IBOverIcr,
                min: 0.0,
                max: 0.92,
                points: 93,
                chern_grid: 0,
            };
            let t = couplings_curve(&cfg)?;
            em.emit("fig2_couplings.csv", &cfg, &t)?;
        }
        Preset::Fig4a => {
            let mut aniso = base_circuit_scan(2, 76.0, 31);
            em.emit("fig4a_anisotropic.csv", &aniso, &scan_curve(&aniso)?)?;

            let mut iso = base_circuit_scan(2, 76.0, 31);
            iso.chain.isotropize = true;
            em.emit("fig4a_isotropic.csv", &iso, &scan_curve(&iso)?)?;

            for (name, t_ramp, t1, t2) in [
                ("fig4a_open_t10.csv", 10.0, 658.0, 812.0),
                ("fig4a_open_t100.csv", 100.0, 658.0, 812.0),
                ("fig4a_open_long_coherence.csv", 10.0, 1500.0, 3000.0),
            ] {
                aniso = base_circuit_scan(2, 76.0, 16);
                aniso.ramp.t_ramp_ns = Some(t_ramp);
                aniso.ramp.t_meas_ns = 10.0;
                aniso.decoherence.enabled = true;
                aniso.decoherence.t1_ns = t1;
                aniso.decoherence.t2_ns = t2;
                em.emit(name, &aniso, &scan_curve(&aniso)?)?;
            }
        }
        Preset::Fig4b | Preset::Fig4d => {
            let (n, h) = if preset == Preset::Fig4b { (4, 49.0) } else { (6, 36.0) };
            let tag = preset.name();
            let bias = base_circuit_scan(n, h, 25);
            em.emit(&format!("{tag}_bias.csv"), &bias, &scan_curve(&bias)?)?;
            let direct = base_direct_scan(n, h, 0.25, 1.2, 25);
            em.emit(&format!("{tag}_direct.csv"), &direct, &scan_curve(&direct)?)?;
        }
        Preset::Fig4c | Preset::Fig4e => {
            let (n, rho_max) = if preset == Preset::Fig4c { (4, 1.2) } else { (6, 1.4) };
            let tag = preset.name();
            let direct = staircase_direct(n, rho_max);
            em.emit(&format!("{tag}_direct.csv"), &direct, &scan_curve(&direct)?)?;
            // bias axis, restricted to where the h-rule stays positive
            let mut bias = staircase_direct(n, rho_max);
            bias.chain.mode = ChainMode::Circuit;
            bias.scan = ScanConfig {
                axis: ScanAxis::IBOverIcr,
                min: 0.40,
                max: 0.90,
                points: 26,
                chern_grid: 0,
            };
            let grid = valid_grid(&bias);
            em.emit(&format!("{tag}_bias.csv"), &bias, &scan_over(&bias, &grid)?)?;
        }
        Preset::Fig5 => {
            let mut cfg = base_direct_scan(2, 76.0, 0.4, 0.4, 1);
            cfg.chain.jbar_over_h = Some(0.4);
            cfg.scan = ScanConfig {
                axis: ScanAxis::TRampNs,
                min: 1.0,
                max: 201.0,
                points: 41,
                chern_grid: 0,
            };
            em.emit("fig5_ramp_time.csv", &cfg, &ramp_time_curve(&cfg)?)?;
        }
        Preset::Fig6a | Preset::Fig6b => {
            let chern = preset == Preset::Fig6b;
            let mut cfg = base_circuit_scan(2, 76.0, 21);
            cfg.disorder.base_seed = seed;
            cfg.disorder.n_alpha = 500;
            if chern {
                cfg.scan.chern_grid = 51;
            }
            let mut merged: Option<ScanTable> = None;
            for eta in [0.0, 0.05, 0.07, 0.10] {
                cfg.disorder.eta = eta;
                let t = disorder_curve(&cfg)?;
                let mut with_eta = ScanTable::new(&["eta"]);
                with_eta.columns.extend(t.columns.iter().cloned());
                for row in &t.rows {
                    let mut r = vec![eta];
                    r.extend(row.iter().cloned());
                    with_eta.rows.push(r);
                }
                match &mut merged {
                    None => merged = Some(with_eta),
                    Some(m) => m.rows.extend(with_eta.rows),
                }
            }
            let name = if chern {
                "fig6b_disorder_chern.csv"
            } else {
                "fig6a_disorder_curvature.csv"
            };
            em.emit(name, &cfg, &merged.expect("at least one eta"))?;
            if chern {
                let mut gap_cfg = base_circuit_scan(2, 76.0, 21);
                gap_cfg.scan.chern_grid = 0;
                em.emit("fig6b_gap.csv", &gap_cfg, &gap_curve(&gap_cfg)?)?;
            }
        }
    }
    em.finish()
}
