//! Crate-wide error type.

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("junction switched: I_b = {ib} uA is not below I_cr = {icr} uA")]
    JunctionSwitched { ib: f64, icr: f64 },

    #[error("coupler resonance: |1 - (omega_q/omega_int)^2| = {denom:.3e} is below tolerance")]
    CouplerResonance { denom: f64 },

    #[error("target Jx = {target:.6e} rad/ns outside achievable range [{lo:.6e}, {hi:.6e}]")]
    CouplingOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("site {site} out of range for a {n}-qubit chain")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("matrix is not Hermitian: relative deviation {dev:.3e}")]
    NotHermitian { dev: f64 },

    #[error("degenerate ground state (gap {gap:.3e} rad/ns): transition point")]
    DegenerateGroundState { gap: f64 },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("generalized force undefined at theta = 0")]
    ForceUndefinedAtPole,

    #[error("ramp velocity is zero at the measurement time")]
    ZeroRampVelocity,

    #[error("density matrix positivity violated: min eigenvalue {min_eig:.3e}")]
    PositivityViolated { min_eig: f64 },

    #[error("invalid decoherence times: T2 = {t2} ns exceeds 2*T1 = {twice_t1} ns")]
    InvalidDecoherence { t2: f64, twice_t1: f64 },

    #[error("no transition detected: curve is flat or monotone without a plateau jump")]
    NoTransition,

    #[error("Berry-curvature sampler failed at theta = {theta}: {source}")]
    ChernSampler {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("disorder sweep: {failed} of {total} sample trajectories failed (> 1%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
