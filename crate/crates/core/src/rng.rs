//! Portable seeded randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`], a thin layer over
//! Xoshiro256** (seeded through SplitMix64, as `rand_xoshiro` does). The
//! derived distributions are spelled out here rather than borrowed from
//! `rand`, so another language can reproduce instances bit for bit:
//!
//! * bounded integer `[0, bound)`: high 64 bits of `next_u64() as u128 * bound`;
//! * uniform `f64` in `[0, 1)`: `(next_u64() >> 11) * 2^-53`;
//! * standard normal: Box-Muller on `u1 = 1 - uniform()` (so `u1 ∈ (0, 1]`) and
//!   `u2 = uniform()`, returning `r cos θ` then the cached `r sin θ`.
//!
//! Independent streams are keyed by `(seed, index)` through [`stream_seed`].

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream under `seed`.
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Generator for stream `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        Self::new(stream_seed(seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, bound)`. `bound` must be nonzero.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.standard_normal()
    }

    /// Binomial draw by summing Bernoulli trials; fine for the trial counts used here.
    pub fn binomial(&mut self, trials: u64, p: f64) -> u64 {
        (0..trials).filter(|_| self.bernoulli(p)).count() as u64
    }
}
