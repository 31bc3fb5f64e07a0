//! Counter-addressed random streams.
//!
//! Every random number used by a run is addressed by `(purpose, step, slot)`
//! inside a single ChaCha8 keystream derived from the run seed. The purpose
//! selects the ChaCha stream id and `(step, slot)` a fixed word offset, so a
//! draw never depends on how many other draws were made before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    InitialState = 0,
    RingNoise = 1,
    StarNoise = 2,
    RingLinks = 3,
    StarLinks = 4,
    SeedDerivation = 5,
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sequential reader positioned at `(step, slot 0)`; the `i`-th value read
    /// is the draw for slot `i`. `stride` is the number of slots per step.
    pub fn block(&self, purpose: Purpose, step: u64, stride: u64) -> Block {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(purpose as u64);
        // Each u64 draw consumes two 32-bit keystream words.
        inner.set_word_pos(2 * u128::from(step) * u128::from(stride));
        Block { inner }
    }

    /// The single value at `(purpose, step, slot)` for a given stride.
    pub fn uniform_at(&self, purpose: Purpose, step: u64, stride: u64, slot: u64) -> f64 {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(purpose as u64);
        inner.set_word_pos(2 * (u128::from(step) * u128::from(stride) + u128::from(slot)));
        inner.gen::<f64>()
    }

    /// Child seed for an indexed sub-run (sweep cell, sample).
    pub fn derive_seed(&self, index: u64) -> u64 {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(Purpose::SeedDerivation as u64);
        inner.set_word_pos(2 * u128::from(index));
        inner.gen::<u64>()
    }
}

pub struct Block {
    inner: ChaCha8Rng,
}

impl Block {
    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// `true` with probability `p`; exact for `p = 0` and `p = 1`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}
