//! Seed derivation and the random stream type used by every oracle.
//!
//! All randomness flows through [`TrialRng`], seeded from 64-bit values that
//! are mixed with [`derive_seed`]. Identical seeds give bit-identical draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed. Order matters.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(base), |acc, &w| mix64(acc ^ mix64(w.wrapping_add(GOLDEN))))
}

pub fn stream(base: u64, words: &[u64]) -> TrialRng {
    TrialRng::seed_from_u64(derive_seed(base, words))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn derived_seeds_are_distinct_over_a_grid() {
        let mut seen = HashSet::new();
        for t in [16u64, 64, 256, 1024, 4096] {
            for j in 0..1000u64 {
                assert!(seen.insert(derive_seed(7, &[t, j])));
            }
        }
    }

    #[test]
    fn word_order_matters() {
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
    }

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<u64> = stream(42, &[1]).random_iter().take(8).collect();
        let b: Vec<u64> = stream(42, &[1]).random_iter().take(8).collect();
        assert_eq!(a, b);
    }
}
