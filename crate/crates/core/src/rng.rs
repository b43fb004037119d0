// Copyright 2026 Quantum Synapse Contributors
// SPDX-License-Identifier: Apache-2.0

//! Replayable random streams.
//!
//! Every stochastic component draws from ChaCha8 (`rand_chacha` 0.9). The
//! 256-bit key holds the little-endian master seed in its first eight bytes
//! (remaining bytes zero) and the 64-bit ChaCha stream id selects an
//! independent substream, so `(seed, stream)` fully determines the output on
//! every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed value shared by all generators in a run.
pub type Seed = u64;

/// Identifies which substream a draw belongs to.
pub type StreamId = u64;

/// Reserved stream ids. Spike trains use their link id directly, so these sit
/// at the top of the id space.
pub mod streams {
    use super::StreamId;

    pub const MEASUREMENT: StreamId = u64::MAX;
    pub const DETECTION: StreamId = u64::MAX - 1;
}

/// Build the generator for `(seed, stream)`.
pub fn stream_rng(seed: Seed, stream: StreamId) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Deterministic child seed for the `index`-th independent sub-run of `seed`
/// (SplitMix64 finaliser over both words).
pub fn derive_seed(seed: Seed, index: u64) -> Seed {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw on the open interval (0, 1).
///
/// Uses the top 53 bits of one `u64` so the mapping is exact and portable.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let bits = rng.next_u64() >> 11;
    (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential variate with the given rate, computed with the portable
/// `libm` logarithm so samples are bit-identical across targets.
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -libm::log(open_unit(rng)) / rate
}
