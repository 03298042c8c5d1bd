//! Map superconducting-circuit parameters and bias current to the exchange
//! couplings (Jx, Jy, Jz) of the effective spin Hamiltonian.
//!
//! The coupling element is a current-biased Josephson junction between two
//! phase qubits; its bias current tunes the junction inductance and with it
//! the strength of the qubit-qubit interaction. Several conventions in the
//! published formulas are ambiguous (flux-quantum prefactor of the junction
//! inductance, frequency convention of quoted GHz values, the sign of the
//! mutual inductance inside the coupler renormalization, the well-level
//! prefactor of Jz, and an overall scale between spin-1/2 and Pauli forms).
//! Each ambiguity sits behind a flag; the defaults are calibrated so that the
//! reference parameter set reproduces the published coupling curve anchors:
//! Jx/2pi ~ 40 MHz at zero bias, a zero crossing near 0.93 I_cr, and
//! Jz/Jx in [0.88, 1] for bias below 0.54 I_cr.

use crate::error::{Error, Result};
use crate::units::{FLUX_QUANTUM, TAU};
use serde::{Deserialize, Serialize};

/// How quoted laboratory frequencies ("omega_q = 4.77 GHz") are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyConvention {
    /// Quoted values are ordinary frequencies nu; internally omega = 2 pi nu.
    #[default]
    OrdinaryNu,
    /// Quoted values are already angular frequencies.
    LiteralOmega,
}

impl FrequencyConvention {
    /// Convert a quoted GHz value to rad/ns under this convention.
    pub fn ghz_to_rad_per_ns(self, quoted_ghz: f64) -> f64 {
        match self {
            FrequencyConvention::OrdinaryNu => quoted_ghz * TAU,
            FrequencyConvention::LiteralOmega => quoted_ghz,
        }
    }
}

/// Physical circuit constants for one coupler bond (homogeneous chain: one
/// set for every bond).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Qubit angular frequency, rad/ns.
    pub omega_q: f64,
    /// Qubit capacitances, pF.
    pub c_j: f64,
    pub c_jp1: f64,
    /// Coupling-junction capacitance, pF. Not quoted in the reference
    /// parameter list; calibrated default 2.0 pF.
    pub c_int: f64,
    /// Coupler arm inductances, nH.
    pub l_r: f64,
    pub l_l: f64,
    /// Mutual inductance magnitude, nH (the circuit carries -M).
    pub m: f64,
    /// Junction critical current, uA.
    pub i_cr: f64,
    /// Well level counts of the two qubits.
    pub n1: f64,
    pub n2: f64,
    /// Use L_int = Phi0 / (2 pi sqrt(Icr^2 - Ib^2)); off reproduces the raw
    /// 1/sqrt(Icr^2 - Ib^2) form (numeric nH) for debugging.
    pub flux_quantum_prefactor_enabled: bool,
    pub frequency_convention: FrequencyConvention,
    /// Carry the negative sign of the mutual inductance into the coupler
    /// renormalization factor (1 - M/L_R)(1 - M/L_L).
    pub negative_mutual_renorm: bool,
    /// Use the literal 1/(6 sqrt(N1 N2)) well-level prefactor on Jz instead
    /// of the calibrated sqrt(N1 N2)/6.
    pub jz_prefactor_literal: bool,
    /// Overall convention scale applied to every coupling.
    pub coupling_scale: f64,
    /// Qubit loop inductance, nH. Metadata only: it enters no implemented
    /// formula.
    pub l_j_metadata: f64,
}

impl CircuitParams {
    /// The reference parameter set with calibrated convention flags.
    pub fn reference() -> Self {
        let convention = FrequencyConvention::OrdinaryNu;
        CircuitParams {
            omega_q: convention.ghz_to_rad_per_ns(4.77),
            c_j: 1.0,
            c_jp1: 1.0,
            c_int: 2.0,
            l_r: 3.0,
            l_l: 3.0,
            m: 0.41,
            i_cr: 3.0,
            n1: 5.0,
            n2: 5.0,
            flux_quantum_prefactor_enabled: true,
            frequency_convention: convention,
            negative_mutual_renorm: true,
            jz_prefactor_literal: false,
            coupling_scale: 0.24,
            l_j_metadata: 0.7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.omega_q, self.c_j, self.c_jp1, self.c_int, self.l_r, self.l_l, self.i_cr,
            self.n1, self.n2,
        ];
        if positive.iter().any(|&x| !(x > 0.0)) || self.m < 0.0 {
            return Err(Error::Config(
                "circuit parameters must be strictly positive".into(),
            ));
        }
        if self.m * self.m >= self.l_r * self.l_l {
            return Err(Error::Config(format!(
                "M^2 = {} must be below L_R*L_L = {}",
                self.m * self.m,
                self.l_r * self.l_l
            )));
        }
        Ok(())
    }
}

/// Exchange couplings of one bond, rad/ns, with the isotropic proxy
/// Jbar = sqrt((Jx^2 + Jy^2 + Jz^2)/3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingStrengths {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub jbar: f64,
}

impl CouplingStrengths {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Self {
        let jbar = ((jx * jx + jy * jy + jz * jz) / 3.0).sqrt();
        CouplingStrengths { jx, jy, jz, jbar }
    }

    /// Isotropic couplings Jx = Jy = Jz = J (then Jbar = |J|).
    pub fn isotropic(j: f64) -> Self {
        CouplingStrengths::new(j, j, j)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CouplingStrengths::new(self.jx * factor, self.jy * factor, self.jz * factor)
    }
}

/// Josephson inductance of the coupling junction in nH.
///
/// With the flux-quantum prefactor this is Phi0/(2 pi sqrt(Icr^2 - Ib^2));
/// without it, the raw 1/sqrt(Icr^2 - Ib^2) with currents in uA read as nH.
pub fn josephson_inductance(i_b: f64, i_cr: f64, prefactor_enabled: bool) -> Result<f64> {
    if !(i_b >= 0.0) || i_b >= i_cr {
        return Err(Error::JunctionSwitched { ib: i_b, icr: i_cr });
    }
    let root = (i_cr * i_cr - i_b * i_b).sqrt(); // uA
    if prefactor_enabled {
        // currents in uA -> A; result in H -> nH
        Ok(FLUX_QUANTUM / (TAU * root * 1e-6) * 1e9)
    } else {
        Ok(1.0 / root)
    }
}

/// Renormalized inductances (M~, L~_R, L~_L, L~_int) in nH for a given bare
/// junction inductance `l_int` (nH).
///
/// The common factor is r = 1 - M^2/(L_R L_L); the coupler factor on L_int is
/// (1 + s M/L_R)(1 + s M/L_L) with s = -1 under the negative-mutual flag.
pub fn renormalized_inductances(p: &CircuitParams, l_int: f64) -> (f64, f64, f64, f64) {
    let r = 1.0 - p.m * p.m / (p.l_r * p.l_l);
    let s = if p.negative_mutual_renorm { -1.0 } else { 1.0 };
    let k = (1.0 + s * p.m / p.l_r) * (1.0 + s * p.m / p.l_l);
    (r * p.m, r * p.l_r, r * p.l_l, k * l_int)
}

/// Relative tolerance on the resonance denominator 1 - (omega_q/omega_int)^2.
const RESONANCE_TOL: f64 = 1e-9;

/// Full bias-current-to-coupling map for one bond.
pub fn couplings(p: &CircuitParams, i_b: f64) -> Result<CouplingStrengths> {
    p.validate()?;
    let l_int = josephson_inductance(i_b, p.i_cr, p.flux_quantum_prefactor_enabled)?;
    let (m_t, l_r_t, l_l_t, l_int_t) = renormalized_inductances(p, l_int);

    // omega_int = 1/sqrt(L_int C_int), rad/ns (nH * pF = 1e-3 ns^2)
    let omega_int = 1.0 / (l_int * p.c_int * 1e-3).sqrt();
    let denom = 1.0 - (p.omega_q / omega_int).powi(2);
    if denom.abs() < RESONANCE_TOL {
        return Err(Error::CouplerResonance { denom });
    }

    // SI denominator: L~_R L~_L omega_q sqrt(C_j C_j+1)
    let den = (l_r_t * 1e-9) * (l_l_t * 1e-9) * (p.omega_q * 1e9) * ((p.c_j * p.c_jp1).sqrt() * 1e-12);

    let num_x = (m_t - l_int_t / denom) * 1e-9;
    let jx = p.coupling_scale * num_x / den * 1e-9; // rad/s -> rad/ns

    let beta = if p.jz_prefactor_literal {
        1.0 / (6.0 * (p.n1 * p.n2).sqrt())
    } else {
        (p.n1 * p.n2).sqrt() / 6.0
    };
    let num_z = (m_t - l_int_t) * 1e-9;
    let jz = p.coupling_scale * beta * num_z / den * 1e-9;

    Ok(CouplingStrengths::new(jx, jx, jz))
}

/// Upper end of the usable bias range, as a fraction of I_cr.
pub const BIAS_SCAN_MAX: f64 = 0.93;

/// Inverse lookup: the bias current (uA) at which Jx equals `jx_target`
/// (rad/ns), by bisection on [0, 0.93 I_cr]. Jx is monotone decreasing there.
pub fn bias_for_coupling(p: &CircuitParams, jx_target: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = BIAS_SCAN_MAX * p.i_cr;
    let j_lo = couplings(p, lo)?.jx;
    let j_hi = couplings(p, hi)?.jx;
    let (top, bottom) = (j_lo.max(j_hi), j_lo.min(j_hi));
    if jx_target > top || jx_target < bottom {
        return Err(Error::CouplingOutOfRange {
            target: jx_target,
            lo: bottom,
            hi: top,
        });
    }
    let tol = 1e-6 * jx_target.abs().max(1e-3 * top.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let j_mid = couplings(p, mid)?.jx;
        if (j_mid - jx_target).abs() <= tol {
            return Ok(mid);
        }
        // decreasing in i_b
        if j_mid > jx_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
