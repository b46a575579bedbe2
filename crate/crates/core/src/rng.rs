//! Seeded random streams.
//!
//! Top-level streams (population init, selection, mutation) are ChaCha8.
//! Stochastic gates draw from cheap SplitMix64 substreams keyed by
//! `(lifetime seed, gate index, update counter)`, so a brain's behavior does
//! not depend on the order its gates are evaluated in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::SplitMix64;

pub type StreamRng = ChaCha8Rng;

/// Mixes a sequence of words into one 64-bit key (SplitMix64 finalizer per word).
pub fn mix(words: &[u64]) -> u64 {
    let mut h: u64 = 0x243F_6A88_85A3_08D3;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// Independent stream for a labelled purpose under a run seed.
pub fn stream(seed: u64, labels: &[u64]) -> StreamRng {
    let mut words = Vec::with_capacity(labels.len() + 1);
    words.push(seed);
    words.extend_from_slice(labels);
    ChaCha8Rng::seed_from_u64(mix(&words))
}

/// Substream used by one gate during one update.
#[inline]
pub fn gate_stream(lifetime_seed: u64, gate_index: usize, update: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(mix(&[lifetime_seed, gate_index as u64, update]))
}
