//! Seeded randomness. All stochastic inputs in the crate flow through here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[allow(unused_imports)]
use num_traits::Float;


pub type LabRng = ChaCha8Rng;

/// The default seed for coefficient ensembles.
pub const DEFAULT_SEED: u64 = 0x5EED;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Magnitude log-uniform on `[lo, hi]` with a uniformly random sign.
pub fn signed_log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let e = rng.gen_range(lo.ln()..=hi.ln());
    let m = e.exp();
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}
