//! Seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` whose seed is derived
//! from a master seed and a path of indices. Derivation is a pure function,
//! so a replica's stream does not depend on how many other replicas exist or
//! in which order they are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `seed`.
pub fn split(seed: u64, index: u64) -> u64 {
    mix(mix(seed.wrapping_add(GOLDEN)) ^ index.wrapping_mul(GOLDEN).wrapping_add(0x6A09_E667_F3BC_C909))
}

/// Child seed along a path of indices, e.g. `derive(master, &[graph, replica])`.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &i| split(s, i))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags keep differently-purposed streams from colliding.
pub mod tag {
    pub const GRAPH: u64 = 1;
    pub const REPLICA: u64 = 2;
    pub const PREJUDICE: u64 = 3;
    pub const INITIAL: u64 = 4;
    pub const PANEL: u64 = 5;
    pub const AUX: u64 = 6;
}
