//! Counter-based random streams.
//!
//! Every draw in an episode comes from a generator keyed by
//! `(seed, step, lane)`, so the outcome of playing arm `i` at step `t` does not
//! depend on what happened earlier or on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lane used for the policy's own sampling; arm lanes are `0..m`.
pub const POLICY_LANE: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a sequence of words into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x6A09_E667_F3BC_C908, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, step: u64, lane: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(&[seed, step, lane]))
}
