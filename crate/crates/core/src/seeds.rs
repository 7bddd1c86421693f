//! Deterministic seed derivation and RNG construction.
//!
//! Every random stream in the crate is a ChaCha8 stream keyed by a `u64`
//! derived from a base seed and one or two stream tags, so independent
//! components (init, batch sampling, per-cell training, evaluation chunks)
//! never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from `base` and `tag`.
pub fn mix(base: u64, tag: u64) -> u64 {
    splitmix64(base ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn mix3(base: u64, a: u64, b: u64) -> u64 {
    mix(mix(base, a), b)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_is_deterministic_and_tag_sensitive() {
        assert_eq!(mix(42, 1), mix(42, 1));
        assert_ne!(mix(42, 1), mix(42, 2));
        assert_ne!(mix(42, 1), mix(43, 1));
    }

    #[test]
    fn rng_streams_reproduce() {
        use rand::RngExt;
        let mut a = rng(7);
        let mut b = rng(7);
        for _ in 0..16 {
            assert_eq!(a.random::<u64>(), b.random::<u64>());
        }
    }
}
