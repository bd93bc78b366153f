//! Block-level execution strategy and deterministic seed derivation.
//!
//! Each block's chain draws from its own generator, seeded by mixing the
//! master seed with a stable hash of the block key. Outputs therefore do
//! not depend on how blocks are scheduled across threads, and the parallel
//! and sequential paths produce identical bytes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How to iterate independent block workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl ExecMode {
    /// Parallel when the feature is compiled in, sequential otherwise.
    pub fn auto() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

/// Map over items with the chosen strategy, preserving input order.
pub fn map_mode<T, U, F>(mode: ExecMode, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    match mode {
        ExecMode::Sequential => items.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => items.into_par_iter().map(f).collect(),
    }
}

/// FNV-1a over bytes; stable across platforms and versions, used for block
/// seed derivation and snapshot-stream fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Extend an FNV-1a fingerprint with more bytes.
pub fn fnv1a64_extend(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// splitmix64 finalizer; scrambles the combined seed material.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Chain seed for one block: master seed mixed with the hash of the block
/// key's display form.
pub fn block_seed(master: u64, block_key: &impl std::fmt::Display) -> u64 {
    let key = block_key.to_string();
    splitmix64(master ^ fnv1a64(key.as_bytes()))
}
