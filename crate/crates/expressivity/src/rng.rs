//! Seed derivation and the deterministic generator used throughout the crate.
//!
//! Every run draws all of its randomness (weight init, batch sampling,
//! marginal shuffles, evaluation batches) from streams derived from a single
//! base seed, so identical inputs plus an identical seed reproduce results
//! bit for bit. Derivation uses the SplitMix64 output function over the
//! sequence `base + (index + 1) * GOLDEN`, which gives well-separated
//! subsidiary seeds even for adjacent indices.

use rand::SeedableRng;

/// Deterministic stream generator backing all sampling in this crate.
pub type Prng = rand_chacha::ChaCha8Rng;

/// SplitMix64 increment (the 64-bit golden ratio constant).
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function: a fixed bijective mixer on 64-bit words.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the `index`-th subsidiary seed of `base`.
///
/// Used to give every run, and every stream within a run, its own
/// independent generator while keeping a single user-facing seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Builds the deterministic generator for a derived seed.
pub fn prng(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}
