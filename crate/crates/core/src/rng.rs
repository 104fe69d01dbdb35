//! Seeded random streams.
//!
//! Every experiment has one master seed. Independent components (test split,
//! initial draw, candidate draws, bootstraps) read from separate ChaCha streams
//! of that seed, so changing how one component consumes randomness never
//! shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const STREAM_SPLIT: u64 = 1;
pub const STREAM_INITIAL: u64 = 2;
pub const STREAM_CANDIDATES: u64 = 3;
pub const STREAM_MODEL: u64 = 4;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finaliser; turns structured seed arithmetic into well-spread seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
