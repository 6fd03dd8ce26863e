//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built by
//! [`seeded_rng`]. A stream is identified by a 64-bit seed (the ChaCha key,
//! expanded from the seed) plus a 64-bit stream number (the ChaCha nonce), so
//! one seed fans out into independent sequences without further hashing:
//! a corpus uses stream `m` of its seed for document `m`, and a fit uses
//! stream 0 of its own seed.
//!
//! Seeds for nested objects (corpora of a group, fits of a corpus) are
//! derived with [`derive_seed`], a SplitMix64 finalizer over the parent seed
//! and a child index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as WorkbenchRng;

/// Opens stream `stream` of `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed `index` of `parent`. Distinct indices give unrelated seeds.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index))
}

/// Index offsets used with [`derive_seed`] so that fit seeds never collide
/// with group-member seeds (which use small indices).
pub mod tags {
    pub const GIBBS: u64 = 0x6769_6262_0000_0000;
    pub const VB: u64 = 0x7662_0000_0000_0000;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_and_stream_repeat() {
        let a: Vec<u64> = seeded_rng(42, 3).random_iter().take(8).collect();
        let b: Vec<u64> = seeded_rng(42, 3).random_iter().take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let a: u64 = seeded_rng(42, 0).random();
        let b: u64 = seeded_rng(42, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen: Vec<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }
}
