//! Seed derivation and complex Gaussian sampling.
//!
//! Every random stream in an experiment is a ChaCha8 generator seeded from a
//! 64-bit value derived with [`stream_seed`]. The mix is a fixed SplitMix64
//! chain, so results do not depend on platform, thread count or scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::C64;

pub type JuiceRng = ChaCha8Rng;

/// Stream tag used for per-experiment draws (pilots, geometry).
pub const EXPERIMENT_STREAM: u64 = u64::MAX;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(splitmix64(splitmix64(master) ^ snr_index) ^ trial_index)`.
pub fn stream_seed(master: u64, snr_index: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ snr_index) ^ trial_index)
}

pub fn rng_from_seed(seed: u64) -> JuiceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One draw from CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
