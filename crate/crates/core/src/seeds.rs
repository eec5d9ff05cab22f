//! Deterministic seed derivation for nested runs.
//!
//! Every stage of the pipeline owns a master seed and hands derived seeds to
//! its sub-jobs, so reruns with the same master seed reproduce every artifact
//! regardless of worker scheduling.

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derive a child seed from a master seed and a stream of tag components.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &t in tags {
        state = splitmix64(state ^ splitmix64(t.wrapping_add(0xa076_1d64_78bd_642f)));
    }
    state
}
