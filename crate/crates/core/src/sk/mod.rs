//! Sherrington–Kirkpatrick token-error model.
//!
//! Tokens are Ising spins (`+1` correct, `-1` wrong) with energy
//! `E[s] = -Σ_{i<j} J_ij s_i s_j - h Σ_i s_i`, couplings i.i.d. `N(0, j0²)`.
//! Sequence accuracy of one realization is the Boltzmann weight of the
//! all-correct state; the ensemble SAR is the geometric mean over couplings.

mod ensemble;
mod exact;
mod series;

pub use ensemble::{sar_disorder_avg, synth_curve, synth_trials, DisorderAverage, Estimator, SkEnsembleSpec};
pub use exact::{energy, log_probabilities, sar_exact_realization, sar_exact_realization_log, ENUMERATION_MAX_SPINS};
pub use series::{sar_perturbative, SeriesOrder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scaling::sar_empirical;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkParams {
    pub n: usize,
    pub j0: f64,
    pub h: f64,
}

impl SkParams {
    pub fn new(n: usize, j0: f64, h: f64) -> Result<Self> {
        let p = SkParams { n, j0, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if !(self.j0 >= 0.0 && self.j0.is_finite()) {
            return Err(Error::param("j0", format!("{} must be nonnegative and finite", self.j0)));
        }
        if !self.h.is_finite() {
            return Err(Error::param("h", "must be finite"));
        }
        Ok(())
    }

    /// Single-spin magnetization `tanh h`.
    pub fn m(&self) -> f64 {
        self.h.tanh()
    }

    /// Single-spin partition function `2 cosh h`.
    pub fn z(&self) -> f64 {
        2.0 * self.h.cosh()
    }

    /// Number of couplings `n(n-1)/2`.
    pub fn pairs(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
}

/// One draw of the couplings, stored as the strict upper triangle row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRealization {
    n: usize,
    couplings: Vec<f64>,
    seed: u64,
}

impl CouplingRealization {
    pub fn new(n: usize, couplings: Vec<f64>, seed: u64) -> Result<Self> {
        if couplings.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Validation(format!(
                "{} couplings given for {n} spins (expected {})",
                couplings.len(),
                n * n.saturating_sub(1) / 2
            )));
        }
        if couplings.iter().any(|j| !j.is_finite()) {
            return Err(Error::Validation("couplings must be finite".into()));
        }
        Ok(CouplingRealization { n, couplings, seed })
    }

    pub fn zeros(n: usize) -> Self {
        CouplingRealization {
            n,
            couplings: vec![0.0; n * n.saturating_sub(1) / 2],
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn upper(&self) -> &[f64] {
        &self.couplings
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// `J_ij`, symmetric, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.couplings[self.index(i, j)],
            std::cmp::Ordering::Greater => self.couplings[self.index(j, i)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.couplings.iter().all(|&j| j == 0.0)
    }

    /// Same realization with every coupling negated.
    pub fn negated(&self) -> Self {
        CouplingRealization {
            n: self.n,
            couplings: self.couplings.iter().map(|j| -j).collect(),
            seed: self.seed,
        }
    }
}

/// Draws `n(n-1)/2` couplings from `N(0, j0²)` using Box–Muller normals of the
/// crate's Xoshiro256** stream seeded by `seed`.
pub fn sample_couplings(params: &SkParams, seed: u64) -> Result<CouplingRealization> {
    params.validate()?;
    let len = params.pairs();
    let couplings = if params.j0 == 0.0 {
        vec![0.0; len]
    } else {
        let mut rng = SeededRng::new(seed);
        (0..len).map(|_| rng.normal(0.0, params.j0)).collect()
    };
    Ok(CouplingRealization {
        n: params.n,
        couplings,
        seed,
    })
}

/// `ln p_tok = ln(1 / (1 + e^{-2h}))`, the log accuracy of a lone token.
pub fn log_p_tok(h: f64) -> f64 {
    if h >= 0.0 {
        -(-2.0 * h).exp().ln_1p()
    } else {
        2.0 * h - (2.0 * h).exp().ln_1p()
    }
}

/// Accuracy without couplings: `p_tok^n`, evaluated as `exp(n ln p_tok)`.
pub fn sar_independent(n: usize, h: f64) -> f64 {
    (n as f64 * log_p_tok(h)).exp()
}

/// Scaling-law parameters predicted by the model: `α = exp(2 j0² / (1 + 2 j0))`, `β₀ = e^{-2h}`.
pub fn params_to_empirical(j0: f64, h: f64) -> (f64, f64) {
    let alpha = (2.0 * j0 * j0 / (1.0 + 2.0 * j0)).exp();
    let beta0 = (-2.0 * h).exp();
    (alpha, beta0)
}

/// Inverse of [`params_to_empirical`], taking the nonnegative root for `j0`.
pub fn empirical_to_params(alpha: f64, beta0: f64) -> Result<(f64, f64)> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::domain("empirical_to_params", format!("alpha = {alpha} must be at least 1")));
    }
    if !(beta0 > 0.0 && beta0 <= 1.0) {
        return Err(Error::domain("empirical_to_params", format!("beta0 = {beta0} must lie in (0, 1]")));
    }
    let la = alpha.ln();
    let j0 = 0.5 * (la + (la * la + 2.0 * la).sqrt());
    let h = -0.5 * beta0.ln();
    Ok((j0, h))
}

/// Closed crossover form `exp(-n exp(2 j0² (n-1)/(1+2 j0) - 2h))`, evaluated
/// through the scaling law so both agree to the bit.
pub fn sar_crossover_approx(params: &SkParams) -> Result<f64> {
    params.validate()?;
    let (alpha, beta0) = params_to_empirical(params.j0, params.h);
    sar_empirical(params.n as f64, alpha, beta0)
}
