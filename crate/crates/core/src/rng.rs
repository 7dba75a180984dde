//! Seedable random source with independent streams.
//!
//! Every Monte Carlo routine draws from a [`RngStream`]. A stream is a
//! ChaCha8 generator keyed by a 64-bit seed plus a 64-bit stream id, so
//! replica `r` of an experiment seeded with `s` always uses
//! `RngStream::replica(s, r)` and produces the same numbers no matter which
//! thread runs it or in what order replicas finish.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::replica(seed, 0)
    }

    /// Stream `stream` of the generator keyed by `seed`.
    pub fn replica(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    /// Derives an independent child stream; used to give each member of a
    /// replica its own sub-stream (e.g. initial sampling vs dynamics).
    pub fn split(&self, child: u64) -> Self {
        let mixed = self.seed ^ child.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        Self::replica(mixed, self.stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `(0, 1]` with 53 random bits.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (multiply-shift, bias below 2^-32 for
    /// the bounds used here).
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.inner.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    /// Exponential waiting time with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform_open0().ln() / rate
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
