//! Seeded random streams.
//!
//! Every random consumer owns its stream. Streams for independent work items
//! (episodes, scenes, Monte-Carlo batches) are derived from a master seed, a
//! stream tag and an item index, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `tag` under `master`.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ tag) ^ index)
}

pub fn derived(master: u64, tag: u64, index: u64) -> SimRng {
    seeded(derive_seed(master, tag, index))
}

/// Stream tags.
pub mod tag {
    pub const SCENE: u64 = 0x5C3E;
    pub const SHOT: u64 = 0x5407;
    pub const MONTE_CARLO: u64 = 0x3C;
    pub const SPLIT: u64 = 0x5B17;
    pub const BALANCE: u64 = 0xBA1A;
    pub const INIT: u64 = 0x1417;
    pub const SHUFFLE: u64 = 0x5F1E;
}
