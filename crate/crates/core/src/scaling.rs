//! The length scaling law `SAR(n) = exp(-β₀ n α^(n-1))`: evaluation, fitting,
//! crossover scales and correlation-error map coordinates.
//!
//! Fitting works in the transformed space
//! `y(n) = ln(-ln SAR) - ln n = ln β₀ + (n - 1) ln α`, where the law is a
//! straight line. Stage one is inverse-variance weighted least squares with
//! delta-method variances `(1 - p) / (T p ln² p)`. Stage two (optional) is a
//! binomial maximum-likelihood refinement by Fisher scoring; it uses every
//! point including saturated ones and gives better calibrated intervals when
//! points carry only a handful of failures.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::scoring::SarCurve;

/// Upper end of the bracket search for [`nstar_half`].
pub const NSTAR_SEARCH_LIMIT: f64 = 1e6;

/// Sequence accuracy under the scaling law. `n` may be fractional.
pub fn sar_empirical(n: f64, alpha: f64, beta0: f64) -> Result<f64> {
    check_positive("n", n)?;
    check_positive("alpha", alpha)?;
    check_positive("beta0", beta0)?;
    Ok((-beta0 * n * alpha.powf(n - 1.0)).exp())
}

/// Crossover scale `1 + ln(1/β₀) / ln α`; defined only when a cliff exists (α > 1).
pub fn nstar_closed(alpha: f64, beta0: f64) -> Result<f64> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::domain("nstar_closed", format!("alpha = {alpha} has no cliff (needs alpha > 1)")));
    }
    if !(beta0 > 0.0 && beta0 <= 1.0) {
        return Err(Error::domain("nstar_closed", format!("beta0 = {beta0} is outside (0, 1]")));
    }
    Ok(1.0 + (1.0 / beta0).ln() / alpha.ln())
}

/// Length at which `SAR(n) = 1/2`, by bracketing bisection.
///
/// The root may be below 1 when `β₀ > ln 2`. For `α ≥ 1` the exponent grows
/// strictly with `n`, so the root is unique; for `α < 1` the first crossing is
/// returned, if any.
pub fn nstar_half(alpha: f64, beta0: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("beta0", beta0)?;
    let (ln_a, ln_b, target) = (alpha.ln(), beta0.ln(), std::f64::consts::LN_2.ln());
    // ln of the exponent β₀ n α^(n-1), minus ln ln 2.
    let g = |n: f64| ln_b + n.ln() + (n - 1.0) * ln_a - target;

    let mut hi;
    if ln_a >= 0.0 {
        hi = 1.0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
            if hi > NSTAR_SEARCH_LIMIT {
                return Err(Error::Numeric(format!(
                    "SAR never reaches 1/2 below n = {NSTAR_SEARCH_LIMIT} (alpha = {alpha}, beta0 = {beta0})"
                )));
            }
        }
    } else {
        hi = -1.0 / ln_a;
        if g(hi) <= 0.0 {
            return Err(Error::Numeric(format!(
                "SAR stays above 1/2 for alpha = {alpha} < 1, beta0 = {beta0}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One observed point of a SAR curve in fitting form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub n: f64,
    pub estimate: f64,
    /// Trials behind the estimate; sets the weights. Fractional values are allowed.
    pub trials: f64,
}

impl Observation {
    pub fn from_curve(curve: &SarCurve) -> Vec<Observation> {
        curve
            .points
            .iter()
            .map(|p| Observation {
                n: p.n as f64,
                estimate: p.estimate,
                trials: p.trials as f64,
            })
            .collect()
    }
}

/// Treatment of points whose estimate is exactly 0 or 1 in the transformed fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaturatedPoints {
    #[default]
    Exclude,
    /// Replace 0 by `1/(2T)` and 1 by `1 - 1/(2T)`.
    Clip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Weighted least squares in the transformed space only.
    #[default]
    Transformed,
    /// Transformed fit followed by binomial maximum likelihood.
    BinomialMl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub saturated: SaturatedPoints,
    pub method: FitMethod,
}

/// Fitted scaling-law parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub beta0: f64,
    pub log_alpha: f64,
    pub log_beta0: f64,
    /// Standard errors of the two regression coefficients.
    pub log_alpha_se: f64,
    pub log_beta0_se: f64,
    /// `None` when there is no cliff (`α ≤ 1`) or `β₀ > 1`.
    pub nstar_closed: Option<f64>,
    /// `None` when SAR never reaches 1/2.
    pub nstar_half: Option<f64>,
    /// Unweighted sum of squared residuals in `y` over the transformed-fit points.
    pub residual: f64,
    pub points_used: usize,
    pub method: FitMethod,
}

impl ScalingFit {
    fn from_coefficients(
        log_beta0: f64,
        log_alpha: f64,
        cov: [[f64; 2]; 2],
        residual: f64,
        points_used: usize,
        method: FitMethod,
    ) -> Self {
        let alpha = log_alpha.exp();
        let beta0 = log_beta0.exp();
        ScalingFit {
            alpha,
            beta0,
            log_alpha,
            log_beta0,
            log_alpha_se: cov[1][1].max(0.0).sqrt(),
            log_beta0_se: cov[0][0].max(0.0).sqrt(),
            nstar_closed: nstar_closed(alpha, beta0).ok(),
            nstar_half: nstar_half(alpha, beta0).ok(),
            residual,
            points_used,
            method,
        }
    }

    /// Normal-approximation interval `ln α ± z·se`.
    pub fn log_alpha_interval(&self, z: f64) -> (f64, f64) {
        (self.log_alpha - z * self.log_alpha_se, self.log_alpha + z * self.log_alpha_se)
    }

    pub fn sar(&self, n: f64) -> Result<f64> {
        sar_empirical(n, self.alpha, self.beta0)
    }
}

/// Point on the correlation-error map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub log_alpha: f64,
    pub log_beta0: f64,
    pub log_nstar: f64,
}

/// `(ln α, ln β₀, ln N*)` with `N*` the half-accuracy length.
pub fn map_point(fit: &ScalingFit) -> Result<MapPoint> {
    let nstar = nstar_half(fit.alpha, fit.beta0)?;
    Ok(MapPoint {
        log_alpha: fit.alpha.ln(),
        log_beta0: fit.beta0.ln(),
        log_nstar: nstar.ln(),
    })
}

struct Transformed {
    x: f64,
    y: f64,
    w: f64,
}

fn transformed_points(obs: &[Observation], saturated: SaturatedPoints) -> Result<Vec<Transformed>> {
    let mut out = Vec::with_capacity(obs.len());
    for o in obs {
        if !(o.n > 0.0) || !(o.trials > 0.0) || !(0.0..=1.0).contains(&o.estimate) {
            return Err(Error::Validation(format!(
                "bad observation n={}, estimate={}, trials={}",
                o.n, o.estimate, o.trials
            )));
        }
        let p = match saturated {
            SaturatedPoints::Exclude if o.estimate <= 0.0 || o.estimate >= 1.0 => continue,
            SaturatedPoints::Exclude => o.estimate,
            SaturatedPoints::Clip => {
                let eps = 0.5 / o.trials;
                o.estimate.clamp(eps, 1.0 - eps)
            }
        };
        let lp = p.ln();
        let var = (1.0 - p) / (o.trials * p * lp * lp);
        out.push(Transformed {
            x: o.n - 1.0,
            y: (-lp).ln() - o.n.ln(),
            w: 1.0 / var,
        });
    }
    Ok(out)
}

fn invert2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs().max(m[1][1].abs()).max(1e-300);
    if !(det.abs() > 1e-14 * scale * scale) {
        return None;
    }
    Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
}

fn weighted_line(pts: &[Transformed]) -> Result<([f64; 2], [[f64; 2]; 2])> {
    // Centering on the weighted mean of x keeps the normal equations well conditioned.
    let sw: f64 = pts.iter().map(|p| p.w).sum();
    let xm = pts.iter().map(|p| p.w * p.x).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.w * p.y).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.w * (p.x - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| p.w * (p.x - xm) * (p.y - ym)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit {
            reason: "all usable points share one length".into(),
            usable: pts.len(),
        });
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let var_slope = 1.0 / sxx;
    let cov_is = -xm * var_slope;
    let var_intercept = 1.0 / sw + xm * xm * var_slope;
    Ok(([intercept, slope], [[var_intercept, cov_is], [cov_is, var_slope]]))
}

fn y_residual(pts: &[Transformed], intercept: f64, slope: f64) -> f64 {
    pts.iter().map(|p| (p.y - intercept - slope * p.x).powi(2)).sum()
}

fn binomial_loglik(obs: &[Observation], theta: [f64; 2]) -> f64 {
    obs.iter()
        .map(|o| {
            let lam = (theta[0] + theta[1] * (o.n - 1.0) + o.n.ln()).exp();
            let k = o.estimate * o.trials;
            let ln_q = (-(-lam).exp_m1()).ln();
            let mut l = 0.0;
            if k > 0.0 {
                l -= k * lam;
            }
            if o.trials - k > 0.0 {
                l += (o.trials - k) * ln_q;
            }
            l
        })
        .sum()
}

/// Fisher scoring for the log-log-link binomial model; returns coefficients
/// and their inverse-information covariance.
fn binomial_refine(obs: &[Observation], start: [f64; 2]) -> Result<([f64; 2], [[f64; 2]; 2])> {
    let mut theta = start;
    let mut ll = binomial_loglik(obs, theta);
    for _ in 0..500 {
        let mut info = [[0.0; 2]; 2];
        let mut score = [0.0; 2];
        for o in obs {
            let x = [1.0, o.n - 1.0];
            let lam = (theta[0] + theta[1] * x[1] + o.n.ln()).exp();
            let p = (-lam).exp();
            let q = -(-lam).exp_m1();
            if !(q > 0.0) {
                continue;
            }
            let k = o.estimate * o.trials;
            let s = -lam * (k - o.trials * p) / q;
            let w = o.trials * lam * lam * p / q;
            for a in 0..2 {
                score[a] += s * x[a];
                for b in 0..2 {
                    info[a][b] += w * x[a] * x[b];
                }
            }
        }
        let cov = invert2(info).ok_or_else(|| Error::Fit {
            reason: "singular Fisher information".into(),
            usable: obs.len(),
        })?;
        let step = [
            cov[0][0] * score[0] + cov[0][1] * score[1],
            cov[1][0] * score[0] + cov[1][1] * score[1],
        ];
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = [theta[0] + scale * step[0], theta[1] + scale * step[1]];
            let cand_ll = binomial_loglik(obs, cand);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                accepted = Some((cand, cand_ll));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, cand_ll)) = accepted else {
            return Ok((theta, cov));
        };
        let moved = (cand[0] - theta[0]).abs().max((cand[1] - theta[1]).abs());
        theta = cand;
        ll = cand_ll;
        if moved < 1e-13 {
            break;
        }
    }
    // Covariance at the final estimate.
    let mut info = [[0.0; 2]; 2];
    for o in obs {
        let x = [1.0, o.n - 1.0];
        let lam = (theta[0] + theta[1] * x[1] + o.n.ln()).exp();
        let p = (-lam).exp();
        let q = -(-lam).exp_m1();
        if q > 0.0 {
            let w = o.trials * lam * lam * p / q;
            for a in 0..2 {
                for b in 0..2 {
                    info[a][b] += w * x[a] * x[b];
                }
            }
        }
    }
    let cov = invert2(info).ok_or_else(|| Error::Fit {
        reason: "singular Fisher information".into(),
        usable: obs.len(),
    })?;
    Ok((theta, cov))
}

/// Fits `(α, β₀)` to raw observations.
pub fn fit_observations(obs: &[Observation], opts: FitOptions) -> Result<ScalingFit> {
    let pts = transformed_points(obs, opts.saturated)?;
    if pts.len() < 2 {
        return Err(Error::Fit {
            reason: "need at least 2 points with SAR strictly between 0 and 1".into(),
            usable: pts.len(),
        });
    }
    let (coef, cov) = weighted_line(&pts)?;
    match opts.method {
        FitMethod::Transformed => Ok(ScalingFit::from_coefficients(
            coef[0],
            coef[1],
            cov,
            y_residual(&pts, coef[0], coef[1]),
            pts.len(),
            FitMethod::Transformed,
        )),
        FitMethod::BinomialMl => {
            let (theta, cov) = binomial_refine(obs, coef)?;
            Ok(ScalingFit::from_coefficients(
                theta[0],
                theta[1],
                cov,
                y_residual(&pts, theta[0], theta[1]),
                obs.len(),
                FitMethod::BinomialMl,
            ))
        }
    }
}

/// Fits the scaling law to a SAR curve.
pub fn fit_scaling(curve: &SarCurve, opts: FitOptions) -> Result<ScalingFit> {
    fit_observations(&Observation::from_curve(curve), opts)
}

/// Fits the pure exponential law (α fixed at 1) by the same weighted scheme.
pub fn fit_exponential(obs: &[Observation], opts: FitOptions) -> Result<ScalingFit> {
    let pts = transformed_points(obs, opts.saturated)?;
    if pts.is_empty() {
        return Err(Error::Fit {
            reason: "no points with SAR strictly between 0 and 1".into(),
            usable: 0,
        });
    }
    let sw: f64 = pts.iter().map(|p| p.w).sum();
    let mut intercept = pts.iter().map(|p| p.w * p.y).sum::<f64>() / sw;
    let mut var = 1.0 / sw;
    if opts.method == FitMethod::BinomialMl {
        // One-parameter Newton on ln β with the slope pinned at 0.
        for _ in 0..200 {
            let (mut s, mut info) = (0.0, 0.0);
            for o in obs {
                let lam = (intercept + o.n.ln()).exp();
                let p = (-lam).exp();
                let q = -(-lam).exp_m1();
                if q > 0.0 {
                    let k = o.estimate * o.trials;
                    s += -lam * (k - o.trials * p) / q;
                    info += o.trials * lam * lam * p / q;
                }
            }
            if !(info > 0.0) {
                break;
            }
            let step = s / info;
            intercept += step;
            var = 1.0 / info;
            if step.abs() < 1e-13 {
                break;
            }
        }
    }
    let points_used = if opts.method == FitMethod::BinomialMl { obs.len() } else { pts.len() };
    Ok(ScalingFit::from_coefficients(
        intercept,
        0.0,
        [[var, 0.0], [0.0, 0.0]],
        y_residual(&pts, intercept, 0.0),
        points_used,
        opts.method,
    ))
}
