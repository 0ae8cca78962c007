//! Deterministic seeding helpers.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a base
//! seed and a small tuple of stream coordinates (epoch, worker, iteration),
//! so runs are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// splitmix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a stream seed from a base seed and stream coordinates.
pub fn derive_seed(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(base), |acc, &c| mix(acc ^ mix(c)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(base: u64, coords: &[u64]) -> Rng {
    rng_from_seed(derive_seed(base, coords))
}
