//! Seeded random number streams.
//!
//! Every stochastic operation in this crate draws from a [`ChaCha8Rng`]
//! stream addressed by `(master seed, stream id)`. Campaigns assign one
//! stream per logical replicate, so any parallel schedule over replicates
//! reproduces the sequential results exactly.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the generator for one logical replicate.
///
/// ChaCha exposes 2^64 independent streams per seed; stream 0 is the
/// conventional choice for single-instance operations.
pub fn replicate_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One uniform draw from the open interval (0, 1).
///
/// Maps the top 52 bits of a single `u64` to `(k + 0.5) * 2^-52`, so the
/// result is never 0 or 1 and the mapping is a fixed function of the raw
/// stream. Each call consumes exactly one `u64`, which keeps weight samples
/// aligned across distribution kinds for a given stream position.
pub fn unit_open(rng: &mut impl RngCore) -> f64 {
    let bits = rng.next_u64() >> 12;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
