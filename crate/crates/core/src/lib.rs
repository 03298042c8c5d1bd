//! Desk-scale simulator of the dynamical quantum Hall effect in a 1D array of
//! coupled superconducting phase qubits.
//!
//! The crate maps circuit parameters to Heisenberg exchange couplings, drives
//! the resulting spin chain through a quadratic polar-angle ramp, and extracts
//! the Berry curvature and Chern number from the linear dynamical response,
//! for both closed (Schrödinger) and open (Lindblad) evolution.
//!
//! Conventions: `hbar = 1`, all energies are angular frequencies in rad/ns,
//! times are in ns. Quoted laboratory frequencies ("76 MHz") are ordinary
//! frequencies and convert via `omega = 2 pi nu` at the config boundary.

pub mod circuit;
pub mod config;
pub mod disorder;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod lindblad;
pub mod ode;
pub mod presets;
pub mod probes;
pub mod schedule;
pub mod spin;
pub mod units;

pub use error::{Error, Result};

use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;
/// Dense complex matrix (operators, Hamiltonians, density matrices).
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector (pure states).
pub type CVector = nalgebra::DVector<C64>;
