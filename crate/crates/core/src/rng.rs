//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20, a counter-based
//! generator. A stream is identified by `(seed, stream_id)`: the seed keys the
//! generator and the stream id selects an independent ChaCha stream, so two
//! operations sharing a seed never share random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream ids for the operations that draw random numbers.
pub mod streams {
    pub const LINE: u64 = 1;
    pub const PLANE: u64 = 2;
    pub const SPHERE: u64 = 3;
    pub const BALL: u64 = 4;
    pub const TORUS_HOLLOW: u64 = 5;
    pub const TORUS_SOLID: u64 = 6;
    pub const TORUS_KNOT: u64 = 7;
    pub const GAUSSIAN: u64 = 8;
    pub const JITTER: u64 = 16;
    pub const SUBSAMPLE: u64 = 32;
    pub const NULL_SHIFTS: u64 = 48;
    pub const TRIAD_SAMPLING: u64 = 64;
    pub const TRIAD_SEEDS: u64 = 80;
    pub const BATTERY: u64 = 96;
}

pub fn stream(seed: u64, stream_id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream for the `index`-th member of a family of draws (null draws, triads).
pub fn substream(seed: u64, stream_id: u64, index: u64) -> ChaCha20Rng {
    let mut rng = stream(seed, stream_id);
    // 2^64 words per stream; jump far enough that members never overlap.
    rng.set_word_pos((index as u128) << 40);
    rng
}
