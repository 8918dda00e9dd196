//! Seeded random streams. Every random draw in the crate goes through a
//! [`RandomStream`] so runs are reproducible from their seed alone.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Substream ids used when a single root seed feeds several consumers.
pub mod streams {
    /// Above-diagonal generation in `generate_both_sides`.
    pub const ABOVE: u64 = 0;
    /// Below-diagonal generation in `generate_both_sides`.
    pub const BELOW: u64 = 1;
    /// The objective's path sampling during an optimizer run.
    pub const OBJECTIVE: u64 = 2;
    /// The optimizer's own decisions (initialization, mutation, ...).
    pub const OPTIMIZER: u64 = 3;
}

/// Source of uniform draws in `[0, 1]` for the path sampler.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// Deterministic ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `id` derived from `seed`; ChaCha's stream counter
    /// keeps substreams of the same seed disjoint.
    pub fn substream(seed: u64, id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(id);
        Self { inner }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl UniformSource for RandomStream {
    fn next_uniform(&mut self) -> f64 {
        self.uniform()
    }
}

impl RngCore for RandomStream {
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

/// Always returns the same value; pins `r` for deterministic sampler checks.
#[derive(Debug, Clone, Copy)]
pub struct PinnedUniform(pub f64);

impl UniformSource for PinnedUniform {
    fn next_uniform(&mut self) -> f64 {
        self.0
    }
}

/// Replays a fixed sequence, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedUniform {
    values: Vec<f64>,
    pos: usize,
}

impl ScriptedUniform {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty());
        Self { values, pos: 0 }
    }
}

impl UniformSource for ScriptedUniform {
    fn next_uniform(&mut self) -> f64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}
