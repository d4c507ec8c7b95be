//! Seeded substreams.
//!
//! Every sample draws from its own ChaCha8 stream keyed by `(seed, stream)`,
//! so results are identical whatever the thread count or evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for sample `sample` of sweep point `point`.
pub fn stream_id(point: usize, sample: usize) -> u64 {
    ((point as u64) << 32) | sample as u64
}
