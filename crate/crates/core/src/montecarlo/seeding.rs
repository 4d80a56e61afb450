//! Deterministic per-chunk seeding.
//!
//! Chunk `k` of a run with seed `s` draws from a ChaCha8 generator seeded (via
//! `SeedableRng::seed_from_u64`) with
//!
//! ```text
//! chunk_seed(s, k) = mix64(s ^ mix64(k + 0x9E3779B97F4A7C15))      (wrapping add)
//! mix64(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!            return z ^ (z >> 31)                                   (wrapping mul)
//! ```
//!
//! `mix64` is the SplitMix64 finalizer. The Poisson noise pass uses chunk index
//! [`NOISE_STREAM`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Chunk index reserved for the per-bin Poisson noise stream.
pub const NOISE_STREAM: u64 = u64::MAX;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn chunk_seed(seed: u64, chunk: u64) -> u64 {
    mix64(seed ^ mix64(chunk.wrapping_add(GOLDEN_GAMMA)))
}

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(chunk_seed(seed, chunk))
}
