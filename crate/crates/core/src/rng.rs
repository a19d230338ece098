//! Seeding. Every random stream in the crate is derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Named sub-streams of a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Shuffle = 2,
    Dropout = 3,
    Folds = 4,
    Negatives = 5,
    Validation = 6,
    Synth = 7,
    Reservoir = 8,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Deterministic child seed for `(seed, stream, index)`.
pub fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream as u64)).wrapping_add(index))
}

pub fn rng_for(seed: u64, stream: Stream, index: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream, index))
}
