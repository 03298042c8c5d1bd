//! Adaptive embedded Runge-Kutta integration for dense complex states.
//!
//! Dormand-Prince 5(4) with a PI-free step controller; a classical fixed-step
//! RK4 is kept as a fallback and as a convergence cross-check. The state is a
//! dense complex matrix: pure states are column matrices, density matrices
//! are square.

use crate::error::{Error, Result};
use crate::{C64, CMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    DormandPrince54,
    ClassicalRk4,
}

/// Integrator settings. `max_step` caps the step size; callers tie it to the
/// spectral radius of the Hamiltonian so that one step never spans more than
/// a fraction of the fastest phase rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub method: Method,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        // tight enough that the accumulated norm drift of a unitary run
        // stays below 1e-8 over the longest desk-scale ramps
        EvolverConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: None,
            method: Method::DormandPrince54,
        }
    }
}

impl EvolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::Config("max_step must be positive".into()));
            }
        }
        Ok(())
    }

    /// Cap the step at a tenth of the fastest phase period 2 pi / omega_max.
    pub fn with_spectral_cap(mut self, omega_max: f64) -> Self {
        if omega_max > 0.0 {
            let cap = 0.1 * std::f64::consts::TAU / omega_max;
            self.max_step = Some(match self.max_step {
                Some(h) => h.min(cap),
                None => cap,
            });
        }
        self
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate dy/dt = f(t, y) from t0 to t1. `observer`, when provided, is
/// called with (t, y) after every accepted step (and once at t0).
pub fn integrate<F>(
    f: &mut F,
    y0: &CMatrix,
    t0: f64,
    t1: f64,
    cfg: &EvolverConfig,
    mut observer: Option<&mut dyn FnMut(f64, &CMatrix)>,
) -> Result<CMatrix>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    cfg.validate()?;
    if t1 <= t0 {
        return Ok(y0.clone());
    }
    if let Some(obs) = observer.as_deref_mut() {
        obs(t0, y0);
    }
    match cfg.method {
        Method::DormandPrince54 => dp54(f, y0, t0, t1, cfg, observer),
        Method::ClassicalRk4 => {
            let span = t1 - t0;
            let h = cfg.max_step.unwrap_or(span / 1000.0).min(span);
            let steps = (span / h).ceil() as usize;
            Ok(rk4_fixed(f, y0, t0, t1, steps.max(1), observer))
        }
    }
}

fn dp54<F>(
    f: &mut F,
    y0: &CMatrix,
    t0: f64,
    t1: f64,
    cfg: &EvolverConfig,
    mut observer: Option<&mut dyn FnMut(f64, &CMatrix)>,
) -> Result<CMatrix>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    let span = t1 - t0;
    let mut y = y0.clone();
    let mut t = t0;
    let mut h = cfg.max_step.unwrap_or(span / 100.0).min(span);
    let h_min = span * 1e-14;

    let shape = y0.shape();
    let mut k: Vec<CMatrix> = (0..7).map(|_| CMatrix::zeros(shape.0, shape.1)).collect();
    let mut stage = CMatrix::zeros(shape.0, shape.1);
    let mut y5 = CMatrix::zeros(shape.0, shape.1);
    let mut err = CMatrix::zeros(shape.0, shape.1);

    let mut steps: u64 = 0;
    loop {
        if t >= t1 {
            return Ok(y);
        }
        if h < h_min {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t} (h = {h:.3e})"
            )));
        }
        steps += 1;
        if steps > 500_000_000 {
            return Err(Error::Integration("step budget exhausted".into()));
        }
        let h_eff = h.min(t1 - t);

        for s in 0..7 {
            stage.copy_from(&y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    stage.zip_apply(kj, |v, kv| *v += kv * C64::new(a * h_eff, 0.0));
                }
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h_eff, &stage, &mut tail[0]);
        }

        y5.copy_from(&y);
        err.fill(C64::new(0.0, 0.0));
        for s in 0..7 {
            if B5[s] != 0.0 {
                y5.zip_apply(&k[s], |v, kv| *v += kv * C64::new(B5[s] * h_eff, 0.0));
            }
            let d = B5[s] - B4[s];
            if d != 0.0 {
                err.zip_apply(&k[s], |v, kv| *v += kv * C64::new(d * h_eff, 0.0));
            }
        }

        // weighted RMS error
        let mut acc = 0.0;
        let ny = y.norm();
        let ny5 = y5.norm();
        let scale = cfg.abs_tol + cfg.rel_tol * ny.max(ny5);
        for e in err.as_slice() {
            let w = e.norm() / scale;
            acc += w * w;
        }
        let err_norm = (acc / err.len() as f64).sqrt();

        if err_norm <= 1.0 {
            t += h_eff;
            std::mem::swap(&mut y, &mut y5);
            if let Some(obs) = observer.as_deref_mut() {
                obs(t, &y);
            }
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h_eff * factor).min(cfg.max_step.unwrap_or(f64::INFINITY));
    }
}

/// Classical fixed-step RK4 over `steps` equal steps.
pub fn rk4_fixed<F>(
    f: &mut F,
    y0: &CMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
    mut observer: Option<&mut dyn FnMut(f64, &CMatrix)>,
) -> CMatrix
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    let h = (t1 - t0) / steps as f64;
    let shape = y0.shape();
    let mut y = y0.clone();
    let mut k1 = CMatrix::zeros(shape.0, shape.1);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        f(t, &y, &mut k1);
        tmp.copy_from(&y);
        tmp.zip_apply(&k1, |v, kv| *v += kv * C64::new(0.5 * h, 0.0));
        f(t + 0.5 * h, &tmp, &mut k2);
        tmp.copy_from(&y);
        tmp.zip_apply(&k2, |v, kv| *v += kv * C64::new(0.5 * h, 0.0));
        f(t + 0.5 * h, &tmp, &mut k3);
        tmp.copy_from(&y);
        tmp.zip_apply(&k3, |v, kv| *v += kv * C64::new(h, 0.0));
        f(t + h, &tmp, &mut k4);
        let w = C64::new(h / 6.0, 0.0);
        for (((yv, &a), (&b, &c)), &d) in y
            .as_mut_slice()
            .iter_mut()
            .zip(k1.as_slice())
            .zip(k2.as_slice().iter().zip(k3.as_slice()))
            .zip(k4.as_slice())
        {
            *yv += w * (a + (b + c) * C64::new(2.0, 0.0) + d);
        }
        if let Some(obs) = observer.as_deref_mut() {
            obs(t + h, &y);
        }
    }
    y
}
