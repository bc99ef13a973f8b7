//! The one pseudo-random generator used everywhere in this crate.
//!
//! Every randomized operation draws from ChaCha8 (`rand_chacha` 0.9) seeded
//! through `SeedableRng::seed_from_u64`. ChaCha output is specified
//! bit-for-bit and independent of platform endianness, so fixtures recorded
//! from a seed reproduce on any target. Normal and exponential variates come
//! from `rand_distr` 0.5 (ziggurat); the lockfile pins that version.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for `seed` on a separate ChaCha stream. Distinct streams of the
/// same key never overlap.
pub fn substream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
