//! Counter-based random streams.
//!
//! A stream is identified by `(seed, index)`; its `j`-th draw is a pure
//! function of `(seed, index, j)`. Sample `i` of a Monte Carlo run uses
//! stream `i`, so any partition of the samples across threads reproduces
//! the serial draws exactly.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A ChaCha8 keystream keyed by `seed`, with `index` selecting the stream.
#[derive(Debug, Clone)]
pub struct CounterStream {
    inner: ChaCha8Rng,
}

impl CounterStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform in `(0, 1]`.
    pub fn next_open_f64(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    /// Standard normal draw.
    pub fn next_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }
}
