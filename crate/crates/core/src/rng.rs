//! Reproducible random streams.
//!
//! Every realization owns its own ChaCha stream keyed by `(seed, stream)`,
//! so results do not depend on how work is batched across threads.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Number of stream ids reserved per side of a multi-sample experiment.
pub const SIDE_STRIDE: u64 = 1 << 40;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = StreamRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id of realization `index` on side `side` of an experiment.
pub fn side_stream(side: u64, index: u64) -> u64 {
    side * SIDE_STRIDE + index
}
