//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by `(seed, stream tag, index)`, so a
//! vector, trial or direction can be regenerated on its own and work can be
//! spread across threads without changing the output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keep unrelated uses of the same user seed apart.
pub mod stream {
    pub const VECTOR: u64 = 0x5645_4354;
    pub const TRIAL: u64 = 0x5452_4941;
    pub const DIRECTION: u64 = 0x4449_5245;
    pub const GRID: u64 = 0x4752_4944;
    pub const GRAPH: u64 = 0x4752_4150;
    pub const RADIUS: u64 = 0x5241_4449;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a parent seed with a stream tag and an index into a child seed.
pub fn derive(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ index)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(seed: u64, tag: u64, index: u64) -> Rng {
    rng(derive(seed, tag, index))
}
