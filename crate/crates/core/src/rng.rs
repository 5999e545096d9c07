//! Seeded random streams and deterministic seed derivation.
//!
//! Every stochastic operation in this crate takes an explicit stream, and
//! independent jobs (solver runs, tuner runs, evaluation cells) get their
//! own stream derived from a parent seed. ChaCha8 is used throughout so
//! results are reproducible across platforms.

use rand::SeedableRng;

/// The random stream used everywhere in this crate.
pub type RandomStream = rand_chacha::ChaCha8Rng;

/// Creates a stream from a 64-bit seed.
pub fn stream_from_seed(seed: u64) -> RandomStream {
    RandomStream::seed_from_u64(seed)
}

/// SplitMix64 finalizer; decorrelates nearby seed values.
fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a stream tag.
///
/// Used for coarse splits (tuner runs, evaluation cells, engine
/// sub-streams). Within a batch of solver runs the convention is instead
/// `seed_base ^ run_index`; see [`crate::solvers::run_many`].
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ splitmix64(tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_seed_same_stream() {
        let mut a = stream_from_seed(42);
        let mut b = stream_from_seed(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn derive_seed_separates_tags() {
        let s = derive_seed(7, 0);
        let t = derive_seed(7, 1);
        assert_ne!(s, t);
        // stable across calls
        assert_eq!(derive_seed(7, 1), t);
    }

    #[test]
    fn derive_seed_separates_bases() {
        assert_ne!(derive_seed(0, 3), derive_seed(1, 3));
    }
}
