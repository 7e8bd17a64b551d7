//! Seed derivation. Every random stream in the crate is a `ChaCha8Rng`
//! seeded from a 64-bit value that is derived from a parent seed and a
//! position (leg index, trial index, ...), so any single run can be
//! replayed from the recorded seed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator, recorded in experiment manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64); child seeds via SplitMix64";

pub(crate) const ARRANGEMENT_STREAM: u64 = 0;
pub(crate) const PLANNER_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for position `index` under `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(index.wrapping_add(0x6A09_E667_F3BC_C908)))
}

/// Child seed for a multi-level position, e.g. `(value index, trial index)`.
pub fn derive_seed_path(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(parent, |s, &i| derive_seed(s, i))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
