//! Seeded random streams.
//!
//! Every random computation takes a `u64` seed. The generator is ChaCha8 keyed
//! by that seed; independent substreams (EM starts, Monte Carlo chunks) use the
//! ChaCha stream id, so substream `i` of seed `s` is the same sequence on every
//! platform and independent of how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), stream id = substream index";

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, substream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(substream);
    rng
}
