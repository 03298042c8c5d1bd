//! Quenched multiplicative disorder on couplings and field, with a stable
//! seed-mixing scheme so sweeps are reproducible under any parallel schedule.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One realization: alpha1 multiplies every (Jx, Jy, Jz), alpha2 multiplies h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    pub alpha1: f64,
    pub alpha2: f64,
}

/// splitmix64 step; stable across platforms and releases.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-task seed: hash of (base_seed, point index, sample index).
pub fn task_seed(base_seed: u64, point: u64, sample: u64) -> u64 {
    let mut s = base_seed;
    let a = splitmix64(&mut s);
    let mut s2 = a ^ point.wrapping_mul(0xa076_1d64_78bd_642f);
    let b = splitmix64(&mut s2);
    let mut s3 = b ^ sample.wrapping_mul(0xe703_7ed1_a0b4_28db);
    splitmix64(&mut s3)
}

/// Uniform draw of (alpha1, alpha2) on [1-eta, 1+eta]^2, deterministic in
/// (seed, index).
pub fn sample_disorder(eta: f64, seed: u64, index: u64) -> DisorderSample {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, 0, index));
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    DisorderSample {
        alpha1: 1.0 - eta + 2.0 * eta * a,
        alpha2: 1.0 - eta + 2.0 * eta * b,
    }
}
