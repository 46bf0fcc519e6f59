//! Seed derivation for the stochastic searches.
//!
//! Every random restart gets its own stream derived from the caller's seed and
//! a restart index, so a search with budget `b + 1` replays the first `b`
//! restarts of a search with budget `b` exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SearchRng = ChaCha8Rng;

/// SplitMix64 finalizer applied to `seed ^ stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, stream_id: u64) -> SearchRng {
    SearchRng::seed_from_u64(derive_seed(seed, stream_id))
}

pub fn gaussian_vec(rng: &mut SearchRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
