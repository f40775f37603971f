//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by a user
//! seed and a stream index (restart, rounding draw, frame...), so results do
//! not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for a two-level index, e.g. (SNR point, frame).
pub fn substream(seed: u64, outer: u64, inner: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ outer.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(inner);
    rng
}
