//! Seed derivation.
//!
//! Every random stream in the crate is keyed by a base seed plus a path of
//! integers (replicate, participant, day, purpose tag). Streams never depend
//! on scheduling order, so parallel and serial runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base`, order-sensitively.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(base: u64, parts: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, parts))
}

/// Purpose tags so that sibling streams with equal paths stay independent.
pub mod tag {
    pub const POPULATION: u64 = 1;
    pub const CONTEXT: u64 = 2;
    pub const RESPONSE: u64 = 3;
    pub const PLAN: u64 = 4;
    pub const SELECT: u64 = 5;
    pub const REPLICATE: u64 = 6;
    pub const DATASET: u64 = 7;
    pub const PRIOR: u64 = 8;
    pub const DROPOUT: u64 = 9;
}
