//! Deterministic seed derivation.
//!
//! Every random stage derives its own seed from the master seed and a stable
//! textual label (plus optional indices). Stages are therefore individually
//! reproducible and independent of execution order. The derivation uses
//! FNV-1a over the label mixed through SplitMix64, both fixed algorithms, so
//! derived seeds are stable across platforms and compiler versions.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a stage label.
pub fn derive(base: u64, label: &str) -> u64 {
    splitmix64(base ^ fnv1a(label.as_bytes()))
}

/// Derive a child seed from `base`, a stage label, and an index
/// (bootstrap resample, grid cell, fold, tree, ...).
pub fn derive_indexed(base: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive(base, label).wrapping_add(splitmix64(index)))
}

/// Seeded RNG for a derived stream.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
