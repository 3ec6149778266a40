//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha stream derived from the
//! run seed, so adding draws in one place never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const PARAM_INIT: u64 = 1;
pub const DROP_EDGE: u64 = 2;
pub const MASK: u64 = 3;
pub const NOISE: u64 = 4;
pub const SIGNAL: u64 = 5;
pub const SPLIT: u64 = 6;
pub const DATA: u64 = 7;
pub const DECODER_INIT: u64 = 8;
pub const REPARAM: u64 = 9;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Counter-based stream for trial `index` of a Monte Carlo run; the same
/// trial draws the same numbers no matter which thread evaluates it.
pub fn trial_stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index);
    rng
}
