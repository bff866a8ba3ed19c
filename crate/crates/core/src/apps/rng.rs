//! Seeded random streams.
//!
//! Every generated quantity draws from its own ChaCha8 stream (same key, distinct
//! stream id), so adding or reordering draws of one quantity never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_RATE: u64 = 1;
pub const STREAM_DEMAND: u64 = 2;
pub const STREAM_OFFSET: u64 = 3;
pub const STREAM_LOWER: u64 = 4;
pub const STREAM_UPPER: u64 = 5;
pub const STREAM_NETWORK: u64 = 6;
pub const STREAM_DSL: u64 = 7;

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
