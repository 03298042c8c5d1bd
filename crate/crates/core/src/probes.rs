//! Physics probes: generalized force, Berry curvature (dynamical and from the
//! adiabatic eigenstate sum), Chern number, and plateau-transition detection.

use crate::circuit::CouplingStrengths;
use crate::error::{Error, Result};
use crate::evolve::TrajectoryResult;
use crate::schedule::RampProtocol;
use crate::spin::{diagonalize, HamiltonianParts, MagneticField};
use crate::units::PI;
use crate::C64;

/// Linear-response result at the measurement angle.
#[derive(Debug, Clone)]
pub struct ProbeResult {
    /// Generalized force, rad/ns.
    pub m_theta: f64,
    /// Berry curvature M_theta / v_theta.
    pub f_theta_phi: f64,
    pub theta_measured: f64,
    pub v_theta_at_measure: f64,
    pub per_qubit_sigma_y: Vec<f64>,
}

/// M_theta = h sin(theta) sum_j <sigma_j^y>. The sin(theta) Jacobian makes
/// the single-spin identity F(theta) = sin(theta)/2 hold at every angle; at
/// theta = pi/2 it reduces to the plain h sum <sigma_y>.
pub fn generalized_force(sigma_y: &[f64], h: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::ForceUndefinedAtPole);
    }
    Ok(h * theta.sin() * sigma_y.iter().sum::<f64>())
}

/// Berry curvature from a finished trajectory: F = M_theta / v_theta(t_end).
pub fn berry_curvature_dynamical(
    traj: &TrajectoryResult,
    protocol: &RampProtocol,
    h: f64,
) -> Result<ProbeResult> {
    let v_theta = protocol.v_theta_at_end();
    if v_theta == 0.0 {
        return Err(Error::ZeroRampVelocity);
    }
    let theta = protocol.theta_final;
    let m_theta = generalized_force(&traj.sigma_y_expectations, h, theta)?;
    Ok(ProbeResult {
        m_theta,
        f_theta_phi: m_theta / v_theta,
        theta_measured: theta,
        v_theta_at_measure: v_theta,
        per_qubit_sigma_y: traj.sigma_y_expectations.clone(),
    })
}

/// Ground-state Berry curvature from the adiabatic eigenstate sum,
///
///   F = -2 Im sum_{n>0} <0|dH/dphi|n><n|dH/dtheta|0> / (E_n - E_0)^2,
///
/// with the analytic field derivatives of the polar parameterization. The
/// ordering of the derivative operators is fixed by the dynamical protocol:
/// a single free spin must give F(theta) = + sin(theta)/2.
pub fn kubo_curvature_oracle(
    n: usize,
    bonds: &[CouplingStrengths],
    field: &MagneticField,
) -> Result<f64> {
    let parts = HamiltonianParts::new(n, bonds)?;
    kubo_curvature_from_parts(&parts, field)
}

/// Same oracle against precomputed operator parts (cheap in sweeps).
pub fn kubo_curvature_from_parts(parts: &HamiltonianParts, field: &MagneticField) -> Result<f64> {
    let h = parts.assemble(field);
    let spec = diagonalize(&h)?;
    let scale = spec
        .energies
        .last()
        .unwrap()
        .abs()
        .max(spec.energies[0].abs())
        .max(1e-300);
    if spec.gap <= 1e-9 * scale {
        return Err(Error::DegenerateGroundState { gap: spec.gap });
    }

    let (st, ct) = (field.theta.sin(), field.theta.cos());
    let (sp, cp) = (field.phi.sin(), field.phi.cos());
    let hh = field.h;
    // dH/dtheta = -(h ct cp Sx + h ct sp Sy - h st Sz)
    let dth = &parts.sum_x * C64::new(-hh * ct * cp, 0.0)
        + &parts.sum_y * C64::new(-hh * ct * sp, 0.0)
        + &parts.sum_z * C64::new(hh * st, 0.0);
    // dH/dphi = -(-h st sp Sx + h st cp Sy)
    let dph = &parts.sum_x * C64::new(hh * st * sp, 0.0) + &parts.sum_y * C64::new(-hh * st * cp, 0.0);

    let ground = spec.states.column(0);
    let dph_g = &dph * &ground;
    let dth_g = &dth * &ground;
    let mut f = 0.0;
    for k in 1..spec.energies.len() {
        let de = spec.energies[k] - spec.energies[0];
        let state = spec.states.column(k);
        let a = state.dotc(&dph_g); // <n|dH/dphi|0>
        let b = state.dotc(&dth_g); // <n|dH/dtheta|0>
        // <0|dH/dphi|n><n|dH/dtheta|0> = conj(a) * b
        f += -2.0 * (a.conj() * b).im / (de * de);
    }
    Ok(f)
}

/// Chern number by trapezoidal integration of F over theta in [0, pi].
#[derive(Debug, Clone)]
pub struct ChernResult {
    pub ch: f64,
    pub theta_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub quadrature: &'static str,
}

/// Integrate a Berry-curvature sampler over [0, pi]. The endpoint values are
/// pinned to zero (the sin(theta) factor kills the curvature at the poles),
/// so the sampler is only invoked at interior grid points.
pub fn chern_number<F>(mut f_of_theta: F, grid_size: usize) -> Result<ChernResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid_size < 3 {
        return Err(Error::Config("chern grid needs at least 3 points".into()));
    }
    let mut theta_grid = Vec::with_capacity(grid_size);
    let mut f_values = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let theta = PI * k as f64 / (grid_size - 1) as f64;
        theta_grid.push(theta);
        if k == 0 || k == grid_size - 1 {
            f_values.push(0.0);
        } else {
            let v = f_of_theta(theta).map_err(|e| Error::ChernSampler {
                theta,
                source: Box::new(e),
            })?;
            f_values.push(v);
        }
    }
    let mut ch = 0.0;
    for k in 1..grid_size {
        let dt = theta_grid[k] - theta_grid[k - 1];
        ch += 0.5 * dt * (f_values[k] + f_values[k - 1]);
    }
    Ok(ChernResult {
        ch,
        theta_grid,
        f_values,
        quadrature: "trapezoid",
    })
}

/// Location of a plateau-to-plateau jump in a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    Jump {
        /// Control value where the curve crosses the mid-level.
        location: f64,
        /// One grid spacing.
        uncertainty: f64,
    },
    NoTransition,
}

/// Plateau levels must differ by at least this much to count as distinct.
const PLATEAU_MIN_SEPARATION: f64 = 0.5;

/// Midpoint-crossing estimate of a single plateau jump. Plateau levels are
/// read from the curve ends (median of the outer three points each).
pub fn detect_transition(curve: &[(f64, f64)]) -> Transition {
    if curve.len() < 4 {
        return Transition::NoTransition;
    }
    let level = |pts: &[(f64, f64)]| -> f64 {
        let mut v: Vec<f64> = pts.iter().map(|p| p.1).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let k = 3.min(curve.len() / 2);
    let left = level(&curve[..k]);
    let right = level(&curve[curve.len() - k..]);
    if (left - right).abs() < PLATEAU_MIN_SEPARATION {
        return Transition::NoTransition;
    }
    let mid = 0.5 * (left + right);
    match crossing_location(curve, mid) {
        Some(location) => {
            let spacing = (curve[1].0 - curve[0].0).abs();
            Transition::Jump {
                location,
                uncertainty: spacing,
            }
        }
        None => Transition::NoTransition,
    }
}

/// All mid-level crossings of a staircase curve, one location per level in
/// `mid_levels` (skipping levels the curve never crosses).
pub fn detect_level_crossings(curve: &[(f64, f64)], mid_levels: &[f64]) -> Vec<(f64, f64)> {
    mid_levels
        .iter()
        .filter_map(|&lvl| crossing_location(curve, lvl).map(|x| (lvl, x)))
        .collect()
}

fn crossing_location(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    for w in curve.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if (y0 - level) * (y1 - level) <= 0.0 && y0 != y1 {
            let t = (level - y0) / (y1 - y0);
            if (0.0..=1.0).contains(&t) {
                return Some(x0 + t * (x1 - x0));
            }
        }
    }
    None
}
