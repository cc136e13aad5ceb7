//! Counter-based noise: every draw is addressed by `(seed, run, step,
//! channel)` so traces do not depend on evaluation order or thread count.
//!
//! The generator is ChaCha20 keyed with `seed` as little-endian bytes 0..8
//! (rest zero), stream number `run`, and word position
//! `2·(4·step + channel)`; one `u64` is read and mapped to `[0, 1)` as
//! `(x >> 11)·2⁻⁵³`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    DelayP = 0,
    DelayV = 1,
    NoiseP = 2,
    NoiseV = 3,
}

#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha20Rng,
}

impl NoiseSource {
    pub fn new(seed: u64, run: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(run);
        Self { rng }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self, step: u64, channel: Channel) -> f64 {
        self.rng.set_word_pos(2 * (4 * step as u128 + channel as u128));
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]` (up to the open upper end of [`Self::unit`]).
    pub fn uniform(&mut self, step: u64, channel: Channel, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit(step, channel)
    }
}
