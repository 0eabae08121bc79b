//! Seeded randomness.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by an
//! explicit 64-bit seed. Independent streams (per cluster, per user, per
//! purpose) are derived by mixing a parent seed with stream tags through
//! SplitMix64, so adding a new consumer never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a sequence of stream tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, tags: &[u64]) -> SimRng {
    rng_from_seed(derive_seed(seed, tags))
}

/// Stream tags used across the crate.
pub mod tags {
    pub const CLUSTER_MEAN: u64 = 1;
    pub const MEMBER: u64 = 2;
    pub const EVAL_SPLIT: u64 = 3;
    pub const NEW_USER: u64 = 4;
    pub const REWARD_NOISE: u64 = 5;
    pub const ARRIVALS: u64 = 6;
    pub const RANDOM_POLICY: u64 = 7;
    pub const DATASET: u64 = 8;
    pub const SHUFFLE: u64 = 9;
}
