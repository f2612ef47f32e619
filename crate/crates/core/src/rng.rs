//! Seeded random streams.
//!
//! Every randomized routine derives its generator from a user seed and a
//! stream number: `ChaCha8Rng::seed_from_u64(seed)` followed by
//! `set_stream(stream)`. Distinct attempts of a rejection sampler use distinct
//! streams, so attempt `k` draws the same numbers no matter which worker runs
//! it or how many attempts ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
