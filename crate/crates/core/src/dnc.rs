//! Divide-and-conquer planning: split a length-`n` task into `k` segments of
//! length `n/k`, solve each, and pay a multiplicative overhead `θ ∈ (0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::scaling::{nstar_closed, sar_empirical};

fn check_common(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64) -> Result<()> {
    check_positive("n", n)?;
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    check_positive("alpha", alpha)?;
    check_positive("beta0", beta0)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::param("theta", format!("{theta} is outside (0, 1]")));
    }
    Ok(())
}

/// `θ · SAR(n/k)^k = θ · exp(-β₀ n α^(n/k - 1))`. `n/k` need not be integral.
pub fn sar_dc(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64) -> Result<f64> {
    check_common(n, k, alpha, beta0, theta)?;
    Ok(theta * (-beta0 * n * alpha.powf(n / k as f64 - 1.0)).exp())
}

/// Log gain `ln θ + β₀ n (α^(n-1) - α^(n/k-1))` of splitting over a single pass.
pub fn gain(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64) -> Result<f64> {
    check_common(n, k, alpha, beta0, theta)?;
    Ok(theta.ln() + beta0 * n * (alpha.powf(n - 1.0) - alpha.powf(n / k as f64 - 1.0)))
}

/// Length beyond which splitting into `k` segments is guaranteed to help:
/// `1 + (ln(1 - 2 ln θ / β₀) + ln 2 / (1 - 1/k)) / ln α`.
pub fn n_dc_bound(k: usize, alpha: f64, beta0: f64, theta: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::domain("n_dc_bound", format!("alpha = {alpha} must exceed 1")));
    }
    if k < 2 {
        return Err(Error::domain("n_dc_bound", format!("k = {k} must be at least 2")));
    }
    check_common(1.0, k, alpha, beta0, theta)?;
    let kf = k as f64;
    Ok(1.0 + ((1.0 - 2.0 * theta.ln() / beta0).ln() + std::f64::consts::LN_2 / (1.0 - 1.0 / kf)) / alpha.ln())
}

/// Crossover scale with `k` segments, `1 + k ln(1/β₀) / ln α`.
pub fn nstar_extended(k: usize, alpha: f64, beta0: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    nstar_closed(alpha, beta0)?;
    Ok(1.0 + k as f64 * (1.0 / beta0).ln() / alpha.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DividePlan {
    pub n: f64,
    pub k: usize,
    pub theta: f64,
    pub alpha: f64,
    pub beta0: f64,
    pub sar_single: f64,
    pub sar_dc: f64,
    pub gain: f64,
    /// `None` where the bound is undefined (`k = 1` or `α ≤ 1`).
    pub n_dc: Option<f64>,
    /// `None` without a cliff.
    pub nstar_extended: Option<f64>,
}

impl DividePlan {
    pub fn new(n: f64, k: usize, alpha: f64, beta0: f64, theta: f64) -> Result<Self> {
        Ok(DividePlan {
            n,
            k,
            theta,
            alpha,
            beta0,
            sar_single: sar_empirical(n, alpha, beta0)?,
            sar_dc: sar_dc(n, k, alpha, beta0, theta)?,
            gain: gain(n, k, alpha, beta0, theta)?,
            n_dc: n_dc_bound(k, alpha, beta0, theta).ok(),
            nstar_extended: nstar_extended(k, alpha, beta0).ok(),
        })
    }
}

/// Segment count in `1..=k_max` with the largest gain; ties go to the smaller `k`.
pub fn best_k(
    n: f64,
    alpha: f64,
    beta0: f64,
    theta_model: impl Fn(f64, usize) -> f64,
    k_max: usize,
) -> Result<(usize, DividePlan)> {
    if k_max == 0 {
        return Err(Error::param("k_max", "must be at least 1"));
    }
    let mut best: Option<DividePlan> = None;
    for k in 1..=k_max {
        let plan = DividePlan::new(n, k, alpha, beta0, theta_model(n, k))?;
        if best.is_none_or(|b| plan.gain > b.gain) {
            best = Some(plan);
        }
    }
    let plan = best.expect("k_max >= 1");
    Ok((plan.k, plan))
}

/// Lengths of `k` contiguous segments covering `n` items: the first `n mod k`
/// get `⌈n/k⌉`, the rest `⌊n/k⌋`. This is for splitting real instances; the
/// formulas above treat `n/k` as a real number.
pub fn segment_lengths(n: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::param("k", format!("{k} segments cannot split {n} items")));
    }
    let (q, r) = (n / k, n % k);
    Ok((0..k).map(|i| if i < r { q + 1 } else { q }).collect())
}
