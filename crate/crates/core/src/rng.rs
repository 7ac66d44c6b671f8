//! Seed expansion.
//!
//! A single global seed fans out into per-stream seeds with a SplitMix64
//! finalizer; per-trial generators are seeded with `stream_seed ^ trial`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent sub-stream (an SNR point, a sweep cell, a restart).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(1)))
}

/// Generator for trial `trial` of a stream.
pub fn trial_rng(stream_seed: u64, trial: u64) -> SimRng {
    SimRng::seed_from_u64(stream_seed ^ trial)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
