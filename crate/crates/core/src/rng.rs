//! Counter-based hashing used to derive reproducible randomness from keys.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. A bijection on `u64` with full avalanche.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Absorbs one word into a running hash state.
#[inline]
pub(crate) fn absorb(state: u64, word: u64) -> u64 {
    mix64(state.wrapping_add(GOLDEN) ^ mix64(word.wrapping_add(GOLDEN.rotate_left(17))))
}

pub(crate) fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c909, |h, &w| absorb(h, w))
}

/// A ChaCha generator seeded from a tuple of key words.
pub(crate) fn keyed_rng(words: &[u64]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut h = hash_words(words);
    for chunk in seed.chunks_mut(8) {
        h = mix64(h.wrapping_add(GOLDEN));
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Unbiased-enough bounded draw: `floor(r * n / 2^64)`. The bias is at most `n / 2^64`.
#[inline]
pub(crate) fn bounded(r: u64, n: u64) -> u64 {
    ((r as u128 * n as u128) >> 64) as u64
}
