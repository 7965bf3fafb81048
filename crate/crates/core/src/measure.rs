//! Projective spin measurements on copies of a qubit, and the reproducible
//! random-number contract used by every simulation.
//!
//! Streams are counter-based: [`derive_stream`] keys a ChaCha8 generator with
//! the master seed and selects the stream by index, so the draws seen by
//! trial `k` depend only on `(master_seed, k)` and never on thread
//! scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::bloch::{BlochState, Vec3};

/// Single-owner deterministic random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
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

pub fn derive_stream(master_seed: u64, stream_index: u64) -> RngStream {
    let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
    inner.set_stream(stream_index);
    RngStream { inner }
}

/// Outcome counts of `n_shots` measurements of `axis . sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotRecord {
    pub axis: Vec3,
    pub n_shots: u64,
    pub n_plus: u64,
}

impl ShotRecord {
    /// Relative frequency of `+` outcomes; 0.5 for an empty record.
    pub fn frequency(&self) -> f64 {
        if self.n_shots == 0 {
            0.5
        } else {
            self.n_plus as f64 / self.n_shots as f64
        }
    }

    /// `2 * frequency - 1`, the empirical mean of the spin projection.
    pub fn chi(&self) -> f64 {
        2.0 * self.frequency() - 1.0
    }
}

/// Probability of a `+` outcome, `(1 + r n . axis) / 2`.
pub fn outcome_prob(s: &BlochState, axis: &Vec3) -> f64 {
    ((1.0 + s.r() * s.direction().dot(axis)) / 2.0).clamp(0.0, 1.0)
}

/// Draws an exact `Binomial(n_shots, p_plus)` count.
pub fn sample_counts(s: &BlochState, axis: &Vec3, n_shots: u64, rng: &mut RngStream) -> ShotRecord {
    let p = outcome_prob(s, axis);
    let n_plus = if n_shots == 0 || p == 0.0 {
        0
    } else if p == 1.0 {
        n_shots
    } else {
        Binomial::new(n_shots, p)
            .expect("p in (0, 1)")
            .sample(rng)
    };
    ShotRecord {
        axis: *axis,
        n_shots,
        n_plus,
    }
}
