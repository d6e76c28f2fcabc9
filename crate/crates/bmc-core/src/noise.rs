//! Deterministic, seed-derived Gaussian increment streams.
//!
//! Each [`NoiseStream`] is an independent one-dimensional Brownian motion
//! source: `increment(dt)` returns a draw from N(0, dt) and advances a
//! counter. Generation is counter-based (a splitmix64-style finalizer applied
//! to `key + cursor * GOLDEN`), so a stream is a pure function of
//! `(seed, stream_id, cursor)` with no hidden state. Distinct `stream_id`s
//! select statistically independent sub-generators from one seed, which lets
//! parallel sweeps replay any trajectory without sharing generator state.
//!
//! Gaussian draws use the Box–Muller transform, cosine branch only: every
//! draw consumes exactly two uniforms and advances the cursor by one. This
//! choice is fixed; changing it would change every recorded trajectory.

use crate::error::{Error, Result};

/// Weyl-sequence increment used by splitmix64.
pub(crate) const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer: bijective avalanche mix of a 64-bit word.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic Gaussian increment stream for one Brownian motion.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    stream_id: u64,
    key: u64,
    cursor: u64,
}

impl NoiseStream {
    /// Creates the stream identified by `(seed, stream_id)`.
    ///
    /// Equal identifiers always reproduce the same increment sequence.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let key = mix64(
            mix64(seed ^ 0x6a09_e667_f3bc_c908).wrapping_add(stream_id.wrapping_mul(GOLDEN_GAMMA)),
        );
        Self {
            seed,
            stream_id,
            key,
            cursor: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of Gaussian draws consumed so far.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    #[inline]
    fn word(&self, index: u64) -> u64 {
        mix64(self.key.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform draw in the open interval (0, 1) with 53-bit resolution.
    #[inline]
    fn uniform_at(&self, index: u64) -> f64 {
        ((self.word(index) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw; advances the cursor by one.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_at(2 * self.cursor);
        let u2 = self.uniform_at(2 * self.cursor + 1);
        self.cursor += 1;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform draw in (0, 1); advances the cursor by one.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        let u = self.uniform_at(2 * self.cursor);
        self.cursor += 1;
        u
    }

    /// Brownian increment ΔB ~ N(0, dt) over a step of length `dt`.
    #[inline]
    pub fn increment(&mut self, dt: f64) -> Result<f64> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        Ok(dt.sqrt() * self.normal())
    }

    /// Cumulative Brownian path B(0)=0, B(t_k)=Σ increments; length `n_steps + 1`.
    pub fn path(&mut self, n_steps: usize, dt: f64) -> Result<Vec<f64>> {
        if n_steps == 0 {
            return Err(Error::InvalidArgument(
                "path requires at least one step".into(),
            ));
        }
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(0.0);
        let mut acc = 0.0;
        for _ in 0..n_steps {
            acc += self.increment(dt)?;
            out.push(acc);
        }
        Ok(out)
    }
}
