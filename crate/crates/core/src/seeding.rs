//! Deterministic substream derivation. One master seed fans out to
//! per-component / per-episode / per-step streams through a SplitMix64
//! chain over `(master, tag...)`, so any part of a run can be reproduced
//! in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Well-known stream tags. Extend rather than reuse.
pub mod tags {
    pub const ENV: u64 = 0x01;
    pub const AGENT: u64 = 0x02;
    pub const EPISODE: u64 = 0x03;
    pub const USERS: u64 = 0x04;
    pub const EVAL: u64 = 0x05;
    pub const WORKER: u64 = 0x06;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit subseed from a master seed and a tag path.
pub fn subseed(master: u64, tags: &[u64]) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xD6E8FEB86659FD93);
        out = splitmix64(&mut state);
    }
    out
}

/// Builds an independent ChaCha8 stream for `(master, tags...)`.
pub fn substream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = master;
    for &t in tags {
        state ^= t.wrapping_mul(0xD6E8FEB86659FD93);
        state = splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
