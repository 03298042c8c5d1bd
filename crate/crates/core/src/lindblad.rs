//! Markovian master equation for the driven chain with independent per-qubit
//! relaxation and pure dephasing, including the post-ramp measurement window.
//!
//! The dissipator follows the published form
//!   L_j[rho] = g (2 s- rho s+ - {s+ s-, rho}) + G (2 sz rho sz - 2 rho)
//! per qubit (plus the thermal s+ channel when n0 > 0). Two rate conventions
//! are provided. The published one sets g = 1/T1 directly, which makes the
//! excited population of a lone qubit decay at 2/T1; it is what reproduces
//! the published open-system plateau numbers and is the default. The
//! calibrated alternative rescales so that population decays at exactly 1/T1
//! and coherence at exactly 1/T2.

use crate::error::{Error, Result};
use crate::evolve::{spectral_radius_bound, DrivenChain};
use crate::ode::{integrate, EvolverConfig};
use crate::schedule::{sample, MeasurementWindow, RampProtocol};
use crate::spin::{
    embed_site_operator, ground_state, hermiticity_deviation, pauli, sigma_minus, Axis,
    HamiltonianParts,
};
use crate::units::HBAR_OVER_KB_RADNS_MK;
use crate::{C64, CMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Coefficient g = 1/T1 as published (population decay 2/T1).
    #[default]
    Paper,
    /// Rescaled so measured population decay time is exactly T1 and measured
    /// coherence decay time exactly T2.
    Calibrated,
}

/// Per-qubit decoherence inputs and derived rates (ns^-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    pub t1: f64,
    pub t2: f64,
    /// Bath temperature, mK.
    pub temperature: f64,
    /// Thermal boson number; zero by default (the fast path).
    pub n0: f64,
    /// 1/T1.
    pub gamma: f64,
    /// 1/T2 - 1/(2 T1).
    pub gamma_phi: f64,
    pub convention: RateConvention,
}

impl DecoherenceParams {
    pub fn new(t1_ns: f64, t2_ns: f64) -> Result<Self> {
        if !(t1_ns > 0.0) || !(t2_ns > 0.0) {
            return Err(Error::Config("decoherence times must be positive".into()));
        }
        if t2_ns > 2.0 * t1_ns {
            return Err(Error::InvalidDecoherence {
                t2: t2_ns,
                twice_t1: 2.0 * t1_ns,
            });
        }
        Ok(DecoherenceParams {
            t1: t1_ns,
            t2: t2_ns,
            temperature: 30.0,
            n0: 0.0,
            gamma: 1.0 / t1_ns,
            gamma_phi: 1.0 / t2_ns - 1.0 / (2.0 * t1_ns),
            convention: RateConvention::Paper,
        })
    }

    /// Enable the finite-temperature channel: n0 = 1/(exp(hbar w_q/kB T) - 1).
    pub fn with_thermal_occupation(mut self, temperature_mk: f64, omega_q: f64) -> Self {
        self.temperature = temperature_mk;
        let x = HBAR_OVER_KB_RADNS_MK * omega_q / temperature_mk;
        self.n0 = 1.0 / (x.exp() - 1.0);
        self
    }

    pub fn with_convention(mut self, convention: RateConvention) -> Self {
        self.convention = convention;
        self
    }

    /// (relaxation, dephasing) coefficients entering the dissipator.
    pub fn coefficients(&self) -> (f64, f64) {
        match self.convention {
            RateConvention::Paper => (self.gamma, self.gamma_phi),
            RateConvention::Calibrated => (0.5 * self.gamma, 0.25 * self.gamma_phi),
        }
    }
}

/// Per-qubit jump operators embedded in the full space.
pub struct LindbladOps {
    pub n: usize,
    sm: Vec<CMatrix>,
    sp: Vec<CMatrix>,
    sz: Vec<CMatrix>,
    /// s+ s- (excited projector scaled) per site.
    pm: Vec<CMatrix>,
    /// s- s+ per site.
    mp: Vec<CMatrix>,
}

impl LindbladOps {
    pub fn new(n: usize) -> Self {
        let sm_site = sigma_minus();
        let sp_site = sm_site.adjoint();
        let sm: Vec<CMatrix> = (1..=n)
            .map(|s| embed_site_operator(n, s, &sm_site).expect("site in range"))
            .collect();
        let sp: Vec<CMatrix> = (1..=n)
            .map(|s| embed_site_operator(n, s, &sp_site).expect("site in range"))
            .collect();
        let sz: Vec<CMatrix> = (1..=n)
            .map(|s| embed_site_operator(n, s, &pauli(Axis::Z)).expect("site in range"))
            .collect();
        let pm = sm.iter().zip(&sp).map(|(m, p)| p * m).collect();
        let mp = sm.iter().zip(&sp).map(|(m, p)| m * p).collect();
        LindbladOps { n, sm, sp, sz, pm, mp }
    }
}

/// Add the full dissipator sum_j L_j[rho] into `out` (which must already hold
/// the coherent part). `w` is scratch of the same shape.
fn add_dissipator_into(
    ops: &LindbladOps,
    d: &DecoherenceParams,
    rho: &CMatrix,
    out: &mut CMatrix,
    w: &mut CMatrix,
) {
    let (g, big_g) = d.coefficients();
    let down = C64::new(g * (1.0 + d.n0), 0.0);
    let up = C64::new(g * d.n0, 0.0);
    let deph = C64::new(big_g, 0.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let two = C64::new(2.0, 0.0);
    for j in 0..ops.n {
        // relaxation: down * (2 s- rho s+ - {s+ s-, rho})
        w.gemm(one, &ops.sm[j], rho, zero);
        out.gemm(two * down, w, &ops.sp[j], one);
        out.gemm(-down, &ops.pm[j], rho, one);
        out.gemm(-down, rho, &ops.pm[j], one);
        if d.n0 > 0.0 {
            // thermal excitation: up * (2 s+ rho s- - {s- s+, rho})
            w.gemm(one, &ops.sp[j], rho, zero);
            out.gemm(two * up, w, &ops.sm[j], one);
            out.gemm(-up, &ops.mp[j], rho, one);
            out.gemm(-up, rho, &ops.mp[j], one);
        }
        if big_g != 0.0 {
            // dephasing: deph * (2 sz rho sz - 2 rho)
            w.gemm(one, &ops.sz[j], rho, zero);
            out.gemm(two * deph, w, &ops.sz[j], one);
            out.zip_apply(rho, |o, r| *o -= two * deph * r);
        }
    }
}

/// drho/dt = -i [H, rho] + sum_j L_j[rho]. Standalone form for tests and
/// callers outside the integrator hot path.
pub fn lindblad_rhs(rho: &CMatrix, h: &CMatrix, d: &DecoherenceParams, n: usize) -> CMatrix {
    let ops = LindbladOps::new(n);
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    let mut w = out.clone();
    let mi = C64::new(0.0, -1.0);
    out.gemm(mi, h, rho, C64::new(0.0, 0.0));
    out.gemm(-mi, rho, h, C64::new(1.0, 0.0));
    add_dissipator_into(&ops, d, rho, &mut out, &mut w);
    out
}

/// Outcome of one open-system trajectory.
#[derive(Debug, Clone)]
pub struct OpenTrajectoryResult {
    pub final_rho: CMatrix,
    /// Tr[rho(t_f) sigma_j^y] per qubit at t_f = t_ramp + t_meas.
    pub sigma_y_expectations: Vec<f64>,
    pub trace_drift: f64,
    pub hermiticity_drift: f64,
    /// Most negative eigenvalue of the final density matrix.
    pub min_eigenvalue: f64,
    pub degenerate_start: bool,
}

/// Allowed positivity violation from integration error.
const POSITIVITY_TOL: f64 = 1e-6;

/// Integrate the master equation through the ramp and the measurement window.
/// During the window the coherent drive is off by default (free evolution
/// under decoherence); the alternative freezes H at its final value.
pub fn evolve_open(
    chain: &DrivenChain,
    protocol: &RampProtocol,
    deco: &DecoherenceParams,
    cfg: &EvolverConfig,
) -> Result<OpenTrajectoryResult> {
    let parts = HamiltonianParts::new(chain.n, &chain.bonds)?;
    let ops = LindbladOps::new(chain.n);
    let start = sample(protocol, chain.jbar, 0.0);
    let h0 = parts.assemble(&start.field);
    let (g0, degenerate_start) = ground_state(&h0)?;

    let dim = parts.dim();
    let mut rho0 = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            rho0[(r, c)] = g0[r] * g0[c].conj();
        }
    }

    let omega_max = spectral_radius_bound(&parts, protocol, chain.jbar)?;
    let cfg = cfg.with_spectral_cap(omega_max);
    let mut trace_drift: f64 = 0.0;
    let mut herm_drift: f64 = 0.0;
    let mut observer = |_t: f64, y: &CMatrix| {
        let tr = y.trace();
        trace_drift = trace_drift.max((tr.re - 1.0).abs().max(tr.im.abs()));
        herm_drift = herm_drift.max(hermiticity_deviation(y));
    };

    let mut h_buf = CMatrix::zeros(dim, dim);
    let mut w_buf = CMatrix::zeros(dim, dim);
    let jbar = chain.jbar;
    let mi = C64::new(0.0, -1.0);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);

    // ramp segment
    let t_end = protocol.end_time();
    let rho_ramp = {
        let mut rhs = |t: f64, y: &CMatrix, out: &mut CMatrix| {
            let drive = sample(protocol, jbar, t);
            parts.assemble_into(&drive.field, &mut h_buf);
            out.gemm(mi, &h_buf, y, zero);
            out.gemm(-mi, y, &h_buf, one);
            add_dissipator_into(&ops, deco, y, out, &mut w_buf);
        };
        integrate(&mut rhs, &rho0, 0.0, t_end, &cfg, Some(&mut observer))?
    };

    // measurement window
    let final_rho = if protocol.t_meas > 0.0 {
        match protocol.window {
            MeasurementWindow::DriveOff => {
                let mut rhs = |_t: f64, y: &CMatrix, out: &mut CMatrix| {
                    out.fill(zero);
                    add_dissipator_into(&ops, deco, y, out, &mut w_buf);
                };
                integrate(
                    &mut rhs,
                    &rho_ramp,
                    t_end,
                    t_end + protocol.t_meas,
                    &cfg,
                    Some(&mut observer),
                )?
            }
            MeasurementWindow::FreezeFinal => {
                let drive = sample(protocol, jbar, t_end);
                parts.assemble_into(&drive.field, &mut h_buf);
                let h_frozen = h_buf.clone();
                let mut rhs = |_t: f64, y: &CMatrix, out: &mut CMatrix| {
                    out.gemm(mi, &h_frozen, y, zero);
                    out.gemm(-mi, y, &h_frozen, one);
                    add_dissipator_into(&ops, deco, y, out, &mut w_buf);
                };
                integrate(
                    &mut rhs,
                    &rho_ramp,
                    t_end,
                    t_end + protocol.t_meas,
                    &cfg,
                    Some(&mut observer),
                )?
            }
        }
    } else {
        rho_ramp
    };

    let min_eigenvalue = min_eigenvalue(&final_rho);
    if min_eigenvalue < -POSITIVITY_TOL {
        return Err(Error::PositivityViolated {
            min_eig: min_eigenvalue,
        });
    }

    let sigma_y = crate::spin::sigma_y_operators(chain.n);
    let sigma_y_expectations: Vec<f64> = sigma_y
        .iter()
        .map(|op| (&final_rho * op).trace().re)
        .collect();

    Ok(OpenTrajectoryResult {
        final_rho,
        sigma_y_expectations,
        trace_drift,
        hermiticity_drift: herm_drift,
        min_eigenvalue,
        degenerate_start,
    })
}

fn min_eigenvalue(rho: &CMatrix) -> f64 {
    let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CouplingStrengths;
    use crate::evolve::evolve;
    use crate::schedule::HRule;
    use crate::units::{ghz, mhz, PI};

    fn random_hermitian(dim: usize, seed: &mut u64) -> CMatrix {
        let next = move |s: &mut u64| {
            *s = s.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = *s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let mut m = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = C64::new(next(seed), next(seed));
            }
        }
        (&m + m.adjoint()) * C64::new(0.5, 0.0)
    }

    #[test]
    fn rhs_is_traceless() {
        let mut seed = 7u64;
        let d = DecoherenceParams::new(600.0, 800.0).unwrap();
        for _ in 0..20 {
            let h = random_hermitian(4, &mut seed);
            let mut rho = random_hermitian(4, &mut seed);
            // shift to unit trace
            let tr = rho.trace();
            rho[(0, 0)] += C64::new(1.0, 0.0) - tr;
            let dr = lindblad_rhs(&rho, &h, &d, 2);
            assert!(dr.trace().norm() < 1e-12, "trace {:?}", dr.trace());
        }
    }

    #[test]
    fn zero_rates_reduce_to_commutator() {
        let mut seed = 13u64;
        let d = DecoherenceParams::new(1e12, 2e12).unwrap();
        let h = random_hermitian(4, &mut seed);
        let rho = random_hermitian(4, &mut seed);
        let dr = lindblad_rhs(&rho, &h, &d, 2);
        let mi = C64::new(0.0, -1.0);
        let comm = (&h * &rho - &rho * &h) * mi;
        assert!((dr - comm).norm() < 1e-9);
    }

    #[test]
    fn single_qubit_population_and_coherence_rates() {
        // H = 0, start in the excited (up) state / in a superposition.
        let t1 = 500.0;
        let t2 = 700.0;
        let t = 40.0;
        for (conv, pop_rate, coh_rate) in [
            (
                RateConvention::Paper,
                2.0 / t1,
                1.0 / t1 + 4.0 * (1.0 / t2 - 0.5 / t1),
            ),
            (RateConvention::Calibrated, 1.0 / t1, 1.0 / t2),
        ] {
            let d = DecoherenceParams::new(t1, t2).unwrap().with_convention(conv);
            let h = CMatrix::zeros(2, 2);
            // population
            let mut rho = CMatrix::zeros(2, 2);
            rho[(0, 0)] = C64::new(1.0, 0.0);
            let mut f = |_t: f64, y: &CMatrix, out: &mut CMatrix| {
                let dr = lindblad_rhs(y, &h, &d, 1);
                out.copy_from(&dr);
            };
            let end = integrate(&mut f, &rho, 0.0, t, &EvolverConfig::default(), None).unwrap();
            let expect = (-pop_rate * t).exp();
            assert!(
                (end[(0, 0)].re - expect).abs() < 1e-7,
                "{conv:?}: population {} vs {expect}",
                end[(0, 0)].re
            );
            // coherence
            let mut rho = CMatrix::zeros(2, 2);
            rho.fill(C64::new(0.5, 0.0));
            let mut f = |_t: f64, y: &CMatrix, out: &mut CMatrix| {
                let dr = lindblad_rhs(y, &h, &d, 1);
                out.copy_from(&dr);
            };
            let end = integrate(&mut f, &rho, 0.0, t, &EvolverConfig::default(), None).unwrap();
            let expect = 0.5 * (-coh_rate * t).exp();
            assert!(
                (end[(0, 1)].norm() - expect).abs() < 1e-7,
                "{conv:?}: coherence {} vs {expect}",
                end[(0, 1)].norm()
            );
        }
    }

    /// Literal transcription of the published two-qubit component equations,
    /// basis (uu, ud, du, dd); the equation set is invariant under relabeling
    /// the two (identical-rate) qubits, so this ordering is equivalent.
    fn hand_coded_two_qubit_rhs(rho: &CMatrix, h: &CMatrix, g: f64, gp: f64) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let hm = |r: usize, c: usize| h[(r - 1, c - 1)];
        let p = |r: usize, c: usize| rho[(r - 1, c - 1)];
        let g = C64::new(g, 0.0);
        let gp = C64::new(gp, 0.0);
        let two = C64::new(2.0, 0.0);
        let three = C64::new(3.0, 0.0);
        let four = C64::new(4.0, 0.0);
        let eight = C64::new(8.0, 0.0);
        let mut out = CMatrix::zeros(4, 4);
        out[(0, 0)] = -i
            * (hm(1, 4) * (p(4, 1) - p(1, 4)) + hm(1, 2) * p(2, 1) + hm(1, 3) * p(3, 1)
                - hm(2, 1) * p(1, 2)
                - hm(3, 1) * p(1, 3))
            - four * g * p(1, 1);
        out[(0, 1)] = -i
            * ((hm(1, 1) - hm(2, 2)) * p(1, 2)
                + hm(1, 2) * (p(2, 2) - p(1, 1))
                + hm(1, 3) * p(3, 2)
                + hm(1, 4) * p(4, 2)
                - hm(3, 2) * p(1, 3)
                - hm(4, 2) * p(1, 4))
            - (three * g + four * gp) * p(1, 2);
        out[(0, 2)] = -i
            * ((hm(1, 1) - hm(3, 3)) * p(1, 3)
                + hm(1, 3) * (p(3, 3) - p(1, 1))
                + hm(1, 2) * p(2, 3)
                + hm(1, 4) * p(4, 3)
                - hm(2, 3) * p(1, 2)
                - hm(4, 3) * p(1, 4))
            - (three * g + four * gp) * p(1, 3);
        out[(0, 3)] = -i
            * ((hm(1, 1) - hm(4, 4)) * p(1, 4)
                + hm(1, 4) * (p(4, 4) - p(1, 1))
                + hm(1, 2) * p(2, 4)
                + hm(1, 3) * p(3, 4)
                - hm(2, 4) * p(1, 2)
                - hm(3, 4) * p(1, 3))
            - (two * g + eight * gp) * p(1, 4);
        out[(1, 0)] = -i
            * ((hm(2, 2) - hm(1, 1)) * p(2, 1)
                + hm(2, 1) * (p(1, 1) - p(2, 2))
                + hm(2, 3) * p(3, 1)
                + hm(2, 4) * p(4, 1)
                - hm(3, 1) * p(2, 3)
                - hm(4, 1) * p(2, 4))
            - (three * g + four * gp) * p(2, 1);
        out[(1, 1)] = -i
            * (hm(2, 3) * (p(3, 2) - p(2, 3)) + hm(2, 1) * p(1, 2) + hm(2, 4) * p(4, 2)
                - hm(1, 2) * p(2, 1)
                - hm(4, 2) * p(2, 4))
            - two * g * (p(2, 2) - p(1, 1));
        out[(1, 2)] = -i
            * ((hm(2, 2) - hm(3, 3)) * p(2, 3)
                + hm(2, 3) * (p(3, 3) - p(2, 2))
                + hm(2, 1) * p(1, 3)
                + hm(2, 4) * p(4, 3)
                - hm(1, 3) * p(2, 1)
                - hm(4, 3) * p(2, 4))
            - (two * g + eight * gp) * p(2, 3);
        out[(1, 3)] = -i
            * ((hm(2, 2) - hm(4, 4)) * p(2, 4)
                + hm(2, 4) * (p(4, 4) - p(2, 2))
                + hm(2, 1) * p(1, 4)
                + hm(2, 3) * p(3, 4)
                - hm(1, 4) * p(2, 1)
                - hm(3, 4) * p(2, 3))
            + two * g * p(1, 3)
            - (g + four * gp) * p(2, 4);
        out[(2, 0)] = -i
            * ((hm(3, 3) - hm(1, 1)) * p(3, 1)
                + hm(3, 1) * (p(1, 1) - p(3, 3))
                + hm(3, 2) * p(2, 1)
                + hm(3, 4) * p(4, 1)
                - hm(2, 1) * p(3, 2)
                - hm(4, 1) * p(3, 4))
            - (three * g + four * gp) * p(3, 1);
        out[(2, 1)] = -i
            * ((hm(3, 3) - hm(2, 2)) * p(3, 2)
                + hm(3, 2) * (p(2, 2) - p(3, 3))
                + hm(3, 1) * p(1, 2)
                + hm(3, 4) * p(4, 2)
                - hm(1, 2) * p(3, 1)
                - hm(4, 2) * p(3, 4))
            - (two * g + eight * gp) * p(3, 2);
        out[(2, 2)] = -i
            * (hm(2, 3) * (p(2, 3) - p(3, 2)) + hm(3, 1) * p(1, 3) + hm(3, 4) * p(4, 3)
                - hm(1, 3) * p(3, 1)
                - hm(4, 3) * p(3, 4))
            - two * g * (p(3, 3) - p(1, 1));
        out[(2, 3)] = -i
            * ((hm(3, 3) - hm(4, 4)) * p(3, 4)
                + hm(3, 4) * (p(4, 4) - p(3, 3))
                + hm(3, 1) * p(1, 4)
                + hm(3, 2) * p(2, 4)
                - hm(1, 4) * p(3, 1)
                - hm(2, 4) * p(3, 2))
            + two * g * p(1, 2)
            - (g + four * gp) * p(3, 4);
        out[(3, 0)] = -i
            * ((hm(4, 4) - hm(1, 1)) * p(4, 1)
                + hm(4, 1) * (p(1, 1) - p(4, 4))
                + hm(4, 2) * p(2, 1)
                + hm(4, 3) * p(3, 1)
                - hm(2, 1) * p(4, 2)
                - hm(3, 1) * p(4, 3))
            - (two * g + eight * gp) * p(4, 1);
        out[(3, 1)] = -i
            * ((hm(4, 4) - hm(2, 2)) * p(4, 2)
                + hm(4, 2) * (p(2, 2) - p(4, 4))
                + hm(4, 1) * p(1, 2)
                + hm(4, 3) * p(3, 2)
                - hm(1, 2) * p(4, 1)
                - hm(3, 2) * p(4, 3))
            + two * g * p(3, 1)
            - (g + four * gp) * p(4, 2);
        out[(3, 2)] = -i
            * ((hm(4, 4) - hm(3, 3)) * p(4, 3)
                + hm(4, 3) * (p(3, 3) - p(4, 4))
                + hm(4, 1) * p(1, 3)
                + hm(4, 2) * p(2, 3)
                - hm(1, 3) * p(4, 1)
                - hm(2, 3) * p(4, 2))
            + two * g * p(2, 1)
            - (g + four * gp) * p(4, 3);
        out[(3, 3)] = -i
            * (hm(1, 4) * (p(1, 4) - p(4, 1)) + hm(4, 2) * p(2, 4) + hm(4, 3) * p(3, 4)
                - hm(2, 4) * p(4, 2)
                - hm(3, 4) * p(4, 3))
            + two * g * (p(2, 2) + p(3, 3));
        out
    }

    #[test]
    fn generic_dissipator_matches_hand_coded_two_qubit_system() {
        let mut seed = 21u64;
        let d = DecoherenceParams::new(658.0, 812.0).unwrap();
        let (g, gp) = d.coefficients();
        for _ in 0..100 {
            let h = random_hermitian(4, &mut seed);
            let rho = random_hermitian(4, &mut seed);
            let generic = lindblad_rhs(&rho, &h, &d, 2);
            let hand = hand_coded_two_qubit_rhs(&rho, &h, g, gp);
            let dev = (&generic - &hand).norm();
            assert!(dev < 1e-12 * generic.norm().max(1.0), "deviation {dev}");
        }
    }

    #[test]
    fn closed_limit_matches_unitary_evolution() {
        let h_amp = mhz(76.0);
        let chain = DrivenChain::homogeneous(2, CouplingStrengths::isotropic(0.4 * h_amp)).unwrap();
        let protocol = RampProtocol::from_t_ramp(20.0, PI / 2.0, HRule::Constant(h_amp)).unwrap();
        let closed = evolve(&chain, &protocol, &EvolverConfig::default()).unwrap();
        let d = DecoherenceParams::new(1e15, 2e15).unwrap();
        let open = evolve_open(&chain, &protocol, &d, &EvolverConfig::default()).unwrap();
        for (a, b) in closed
            .sigma_y_expectations
            .iter()
            .zip(&open.sigma_y_expectations)
        {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        // purity preserved in the closed limit
        let purity = (&open.final_rho * &open.final_rho).trace().re;
        assert!((purity - 1.0).abs() < 1e-6, "purity {purity}");
    }

    #[test]
    fn density_matrix_stays_physical() {
        let h_amp = mhz(76.0);
        let chain = DrivenChain::homogeneous(2, CouplingStrengths::isotropic(0.6 * h_amp)).unwrap();
        let protocol = RampProtocol::from_t_ramp(10.0, PI / 2.0, HRule::Constant(h_amp))
            .unwrap()
            .with_measurement(10.0, MeasurementWindow::DriveOff);
        let d = DecoherenceParams::new(658.0, 812.0).unwrap();
        let open = evolve_open(&chain, &protocol, &d, &EvolverConfig::default()).unwrap();
        assert!(open.trace_drift < 1e-10, "trace drift {}", open.trace_drift);
        assert!(open.hermiticity_drift < 1e-10);
        assert!(open.min_eigenvalue > -1e-8);
    }

    #[test]
    fn t2_beyond_dynamical_decoupling_limit_is_rejected() {
        assert!(matches!(
            DecoherenceParams::new(100.0, 201.0),
            Err(Error::InvalidDecoherence { .. })
        ));
        assert!(DecoherenceParams::new(100.0, 200.0).is_ok());
    }

    #[test]
    fn thermal_occupation_is_negligible_at_operating_point() {
        let d = DecoherenceParams::new(658.0, 812.0)
            .unwrap()
            .with_thermal_occupation(30.0, ghz(4.77));
        assert!(d.n0 > 0.0 && d.n0 < 1e-3, "n0 = {}", d.n0);
    }

    #[test]
    fn freeze_window_variant_differs_from_drive_off() {
        let h_amp = mhz(76.0);
        let chain = DrivenChain::homogeneous(2, CouplingStrengths::isotropic(0.3 * h_amp)).unwrap();
        let d = DecoherenceParams::new(658.0, 812.0).unwrap();
        let p_off = RampProtocol::from_t_ramp(10.0, PI / 2.0, HRule::Constant(h_amp))
            .unwrap()
            .with_measurement(10.0, MeasurementWindow::DriveOff);
        let p_frozen = RampProtocol::from_t_ramp(10.0, PI / 2.0, HRule::Constant(h_amp))
            .unwrap()
            .with_measurement(10.0, MeasurementWindow::FreezeFinal);
        let a = evolve_open(&chain, &p_off, &d, &EvolverConfig::default()).unwrap();
        let b = evolve_open(&chain, &p_frozen, &d, &EvolverConfig::default()).unwrap();
        let sa: f64 = a.sigma_y_expectations.iter().sum();
        let sb: f64 = b.sigma_y_expectations.iter().sum();
        assert!((sa - sb).abs() > 1e-6);
    }
}
