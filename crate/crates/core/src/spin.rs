//! Pauli operators, N-qubit chain Hamiltonians, and dense eigensolutions.
//!
//! Basis convention: qubit 1 is the most significant bit of the basis index
//! and |up> (sigma_z = +1) is bit value 0, so basis state 0 is |up...up>.

use crate::circuit::CouplingStrengths;
use crate::error::{Error, Result};
use crate::{C64, CMatrix, CVector};
use serde::{Deserialize, Serialize};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// 2x2 Pauli matrix.
pub fn pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// sigma^- = |down><up| (lowers the bare qubit).
pub fn sigma_minus() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

/// Embed a single-site Pauli at `site` (1-based) into the 2^N space.
pub fn pauli_string(n: usize, site: usize, axis: Axis) -> Result<CMatrix> {
    embed_site_operator(n, site, &pauli(axis))
}

/// Embed an arbitrary 2x2 operator at `site` (1-based).
pub fn embed_site_operator(n: usize, site: usize, op: &CMatrix) -> Result<CMatrix> {
    if n == 0 || site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let id = CMatrix::identity(2, 2);
    let mut out = CMatrix::identity(1, 1);
    for j in 1..=n {
        out = out.kronecker(if j == site { op } else { &id });
    }
    Ok(out)
}

/// Time-independent drive field in polar form; the component vector is
/// (h sin(theta) cos(phi), h sin(theta) sin(phi), h cos(theta)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    /// Amplitude, rad/ns.
    pub h: f64,
    /// Polar angle, [0, pi].
    pub theta: f64,
    /// Azimuth.
    pub phi: f64,
}

impl MagneticField {
    pub fn new(h: f64, theta: f64, phi: f64) -> Self {
        MagneticField { h, theta, phi }
    }

    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = (self.theta.sin(), self.theta.cos());
        let (sp, cp) = (self.phi.sin(), self.phi.cos());
        [self.h * st * cp, self.h * st * sp, self.h * ct]
    }
}

/// Open-boundary N-qubit chain: N-1 bonds plus a global field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    pub n: usize,
    pub bonds: Vec<CouplingStrengths>,
    pub field: MagneticField,
}

impl SpinChainSpec {
    pub fn new(n: usize, bonds: Vec<CouplingStrengths>, field: MagneticField) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("chain needs at least one qubit".into()));
        }
        if bonds.len() != n - 1 {
            return Err(Error::Config(format!(
                "open chain with {} qubits needs {} bonds, got {}",
                n,
                n - 1,
                bonds.len()
            )));
        }
        Ok(SpinChainSpec { n, bonds, field })
    }

    /// Homogeneous chain: every bond carries the same couplings.
    pub fn homogeneous(n: usize, j: CouplingStrengths, field: MagneticField) -> Result<Self> {
        SpinChainSpec::new(n, vec![j; n.saturating_sub(1)], field)
    }
}

/// Precomputed operator pieces for fast time-dependent assembly:
/// H(field) = -(hx Sx + hy Sy + hz Sz) + exchange, with Sr = sum_j sigma_j^r.
pub struct HamiltonianParts {
    pub n: usize,
    pub sum_x: CMatrix,
    pub sum_y: CMatrix,
    pub sum_z: CMatrix,
    pub exchange: CMatrix,
}

impl HamiltonianParts {
    pub fn new(n: usize, bonds: &[CouplingStrengths]) -> Result<Self> {
        if bonds.len() + 1 != n {
            return Err(Error::Config(format!(
                "{} bonds do not fit a {}-qubit open chain",
                bonds.len(),
                n
            )));
        }
        let dim = 1usize << n;
        let mut sums = [
            CMatrix::zeros(dim, dim),
            CMatrix::zeros(dim, dim),
            CMatrix::zeros(dim, dim),
        ];
        let axes = [Axis::X, Axis::Y, Axis::Z];
        let site_ops: Vec<Vec<CMatrix>> = (1..=n)
            .map(|site| {
                axes.iter()
                    .map(|&a| pauli_string(n, site, a).expect("site in range"))
                    .collect()
            })
            .collect();
        for ops in &site_ops {
            for (k, op) in ops.iter().enumerate() {
                sums[k] += op;
            }
        }
        let mut exchange = CMatrix::zeros(dim, dim);
        for (j, bond) in bonds.iter().enumerate() {
            let couplings = [bond.jx, bond.jy, bond.jz];
            for (k, &jr) in couplings.iter().enumerate() {
                if jr != 0.0 {
                    let prod = &site_ops[j][k] * &site_ops[j + 1][k];
                    exchange += prod * C64::new(jr, 0.0);
                }
            }
        }
        let [sum_x, sum_y, sum_z] = sums;
        Ok(HamiltonianParts {
            n,
            sum_x,
            sum_y,
            sum_z,
            exchange,
        })
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Assemble H for a given field into `out` without allocating.
    pub fn assemble_into(&self, field: &MagneticField, out: &mut CMatrix) {
        let [hx, hy, hz] = field.vector();
        let ex = self.exchange.as_slice();
        let sx = self.sum_x.as_slice();
        let sy = self.sum_y.as_slice();
        let sz = self.sum_z.as_slice();
        for (((o, &e), ((&x, &y), &z)), _) in out
            .as_mut_slice()
            .iter_mut()
            .zip(ex)
            .zip(sx.iter().zip(sy).zip(sz))
            .zip(0..)
        {
            *o = e - x * hx - y * hy - z * hz;
        }
    }

    pub fn assemble(&self, field: &MagneticField) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        self.assemble_into(field, &mut out);
        out
    }
}

/// H = -sum_j h.sigma_j + sum_j (Jx sx sx + Jy sy sy + Jz sz sz).
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<CMatrix> {
    Ok(HamiltonianParts::new(spec.n, &spec.bonds)?.assemble(&spec.field))
}

/// Relative Hermiticity deviation ||H - H^dag|| / max(||H||, eps).
pub fn hermiticity_deviation(h: &CMatrix) -> f64 {
    let diff = h - h.adjoint();
    diff.norm() / h.norm().max(1e-300)
}

/// Full dense eigensolution of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues, rad/ns.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as matrix columns, ordered like `energies`.
    pub states: CMatrix,
    /// energies[1] - energies[0].
    pub gap: f64,
}

const HERMITICITY_TOL: f64 = 1e-12;

/// Diagonalize a Hermitian matrix with deterministic ordering and phases.
pub fn diagonalize(h: &CMatrix) -> Result<Spectrum> {
    let dev = hermiticity_deviation(h);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian { dev });
    }
    // symmetrize to scrub rounding noise before factorization
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let dim = h.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut states = CMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        let mut v: CVector = eig.eigenvectors.column(k).into_owned();
        fix_phase(&mut v);
        states.set_column(col, &v);
    }
    let gap = if dim > 1 {
        energies[1] - energies[0]
    } else {
        f64::INFINITY
    };
    Ok(Spectrum {
        energies,
        states,
        gap,
    })
}

/// Rotate a state's global phase so its largest-magnitude entry is real
/// positive; keeps eigenvector output deterministic.
pub fn fix_phase(v: &mut CVector) {
    let mut idx = 0;
    let mut best = 0.0;
    for (k, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best {
            best = m;
            idx = k;
        }
    }
    let z = v[idx];
    let m = z.norm();
    if m > 0.0 {
        let rot = z.conj() / m;
        for e in v.iter_mut() {
            *e *= rot;
        }
    }
}

/// Lowest-energy eigenvector. Within `1e-9 ||H||` of degeneracy the candidate
/// with maximal overlap with |up...up> is chosen and the result is flagged.
pub fn ground_state(h: &CMatrix) -> Result<(CVector, bool)> {
    let spec = diagonalize(h)?;
    let scale = h.norm().max(1e-300);
    let tol = 1e-9 * scale;
    let near: Vec<usize> = spec
        .energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e - spec.energies[0] < tol)
        .map(|(k, _)| k)
        .collect();
    if near.len() == 1 {
        return Ok((spec.states.column(0).into_owned(), false));
    }
    // |up..up> is basis state 0
    let mut best_col = near[0];
    let mut best_overlap = -1.0;
    for &k in &near {
        let overlap = spec.states[(0, k)].norm_sqr();
        if overlap > best_overlap {
            best_overlap = overlap;
            best_col = k;
        }
    }
    Ok((spec.states.column(best_col).into_owned(), true))
}

/// <psi| O |psi> for a Hermitian O, returning the real part.
pub fn expectation(op: &CMatrix, psi: &CVector) -> f64 {
    let tmp = op * psi;
    psi.dotc(&tmp).re
}

/// Per-qubit sigma_y operators, used by every response probe.
pub fn sigma_y_operators(n: usize) -> Vec<CMatrix> {
    (1..=n)
        .map(|site| pauli_string(n, site, Axis::Y).expect("site in range"))
        .collect()
}
