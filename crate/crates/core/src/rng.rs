//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built here from
//! an explicit seed plus a fixed per-purpose stream id, so two components
//! that share a seed never share a sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub(crate) mod stream {
    pub const SPLIT_OOD: u64 = 1;
    pub const SPLIT_REST: u64 = 2;
    pub const INIT_TARGET: u64 = 3;
    pub const INIT_SHORTCUT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const NEGATIVES: u64 = 6;
    pub const SYNTH_LATENT: u64 = 7;
    pub const SYNTH_INTERACTIONS: u64 = 8;
    pub const SYNTH_OOD: u64 = 9;
    pub const CORRELATION: u64 = 10;
    pub const SHORTCUT_SHUFFLE: u64 = 11;
    pub const SHORTCUT_NEGATIVES: u64 = 12;
}

/// A generator for `seed`, positioned on the given stream.
pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
