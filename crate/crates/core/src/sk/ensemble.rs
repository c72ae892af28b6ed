use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exact::sar_exact_realization_log, sample_couplings, CouplingRealization, SkParams};
use crate::error::{Error, Result};
use crate::rng::{stream_seed, SeededRng};
use crate::scoring::SarCurve;

/// Estimator of `E_J ln p_J[all +1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Mean of `ln p_J` over independent draws.
    Plain,
    /// Antithetic pairs `(J, -J)` plus a quadratic control variate with known
    /// mean. Each unit is a pair, so `R` realizations form `⌈R/2⌉` pairs.
    #[default]
    AntitheticControlVariate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkEnsembleSpec {
    pub params: SkParams,
    pub realizations: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
}

impl SkEnsembleSpec {
    pub fn new(params: SkParams, realizations: usize, master_seed: u64) -> Result<Self> {
        let spec = SkEnsembleSpec {
            params,
            realizations,
            master_seed,
            estimator: Estimator::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.realizations == 0 {
            return Err(Error::param("realizations", "must be at least 1"));
        }
        Ok(())
    }

    /// Couplings of realization `index`.
    pub fn realization(&self, index: usize) -> Result<CouplingRealization> {
        sample_couplings(&self.params, stream_seed(self.master_seed, index as u64))
    }
}

/// Ensemble summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderAverage {
    /// `exp(log_mean)`: the geometric-mean SAR.
    pub sar_geo: f64,
    /// Estimate of `E_J ln p_J[all +1]`.
    pub log_mean: f64,
    /// Standard error of `log_mean`; NaN with fewer than two units.
    pub stderr_log: f64,
    /// Arithmetic mean of `p_J[all +1]` over every evaluated realization.
    pub sar_arith: f64,
    /// Plain mean of `ln p_J` over every evaluated realization.
    pub plain_log_mean: f64,
    /// Number of coupling realizations evaluated.
    pub evaluated: usize,
}

/// Running mean and variance; a constant sequence gives that constant exactly.
#[derive(Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// `½ Jᵀ C J`, with `C` the covariance of the pair products `s_i s_j` at zero
/// coupling: `1 - m⁴` on the diagonal, `m²(1 - m²)` for pairs sharing a spin.
fn quadratic_form(j: &CouplingRealization, m: f64) -> f64 {
    let n = j.n();
    let m2 = m * m;
    let diag: f64 = j.upper().iter().map(|x| x * x).sum();
    let mut shared = 0.0;
    for i in 0..n {
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let x = j.get(i, k);
            s += x;
            s2 += x * x;
        }
        shared += s * s - s2;
    }
    0.5 * ((1.0 - m2 * m2) * diag + m2 * (1.0 - m2) * shared)
}

/// Disorder average of `ln p_J[all +1]` by exact enumeration per realization.
///
/// Realization `r` uses couplings seeded by `stream_seed(master_seed, r)`.
/// Realizations run in parallel; the reduction is sequential in index order,
/// so the result does not depend on the thread count.
pub fn sar_disorder_avg(spec: &SkEnsembleSpec) -> Result<DisorderAverage> {
    spec.validate()?;
    let h = spec.params.h;
    let (units, samples): (usize, Vec<(f64, f64)>) = match spec.estimator {
        Estimator::Plain => {
            let logs = (0..spec.realizations)
                .into_par_iter()
                .map(|r| {
                    let j = spec.realization(r)?;
                    let l = sar_exact_realization_log(&j, h)?;
                    Ok((l, l))
                })
                .collect::<Result<Vec<_>>>()?;
            (spec.realizations, logs)
        }
        Estimator::AntitheticControlVariate => {
            let m = spec.params.m();
            let j2 = spec.params.j0 * spec.params.j0;
            let expected_q = 0.5 * j2 * spec.params.pairs() as f64 * (1.0 - m.powi(4));
            let pairs = spec.realizations.div_ceil(2);
            let draws = (0..pairs)
                .into_par_iter()
                .map(|r| {
                    let j = spec.realization(r)?;
                    let plus = sar_exact_realization_log(&j, h)?;
                    let minus = sar_exact_realization_log(&j.negated(), h)?;
                    // The linear control term (1 - m²) ΣJ cancels inside the pair.
                    let y = 0.5 * (plus + minus) + (quadratic_form(&j, m) - expected_q);
                    Ok([(y, plus), (y, minus)])
                })
                .collect::<Result<Vec<_>>>()?;
            (pairs, draws.into_iter().flatten().collect())
        }
    };

    let mut est = Welford::default();
    let mut plain = Welford::default();
    let mut arith = Welford::default();
    let stride = samples.len() / units;
    for (k, &(y, l)) in samples.iter().enumerate() {
        if k % stride == 0 {
            est.push(y);
        }
        plain.push(l);
        arith.push(l.exp());
    }
    Ok(DisorderAverage {
        sar_geo: est.mean.exp(),
        log_mean: est.mean,
        stderr_log: est.stderr(),
        sar_arith: arith.mean,
        plain_log_mean: plain.mean,
        evaluated: samples.len(),
    })
}

const TRIAL_STREAM: u64 = 0x7472_6961_6c73;

/// Synthetic agent: for each realization, `trials_per_realization` Bernoulli
/// draws with success probability `p_J[all +1]`. Returns `(n, success)` pairs.
///
/// The success rate estimates the arithmetic disorder mean, not the geometric one.
pub fn synth_trials(spec: &SkEnsembleSpec, trials_per_realization: usize) -> Result<Vec<(usize, bool)>> {
    spec.validate()?;
    if trials_per_realization == 0 {
        return Err(Error::param("trials_per_realization", "must be at least 1"));
    }
    let n = spec.params.n;
    let per_realization = (0..spec.realizations)
        .into_par_iter()
        .map(|r| {
            let j = spec.realization(r)?;
            let p = sar_exact_realization_log(&j, spec.params.h)?.exp();
            let mut rng = SeededRng::stream(stream_seed(spec.master_seed, r as u64), TRIAL_STREAM);
            Ok((0..trials_per_realization).map(|_| (n, rng.bernoulli(p))).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_realization.into_iter().flatten().collect())
}

/// SAR curve of the synthetic agent over a grid of lengths. Each length gets
/// its own ensemble seeded by `stream_seed(master_seed, n)`.
pub fn synth_curve(
    j0: f64,
    h: f64,
    lengths: &[usize],
    realizations: usize,
    trials_per_realization: usize,
    master_seed: u64,
) -> Result<SarCurve> {
    let mut outcomes = Vec::new();
    for &n in lengths {
        let spec = SkEnsembleSpec::new(SkParams::new(n, j0, h)?, realizations, stream_seed(master_seed, n as u64))?;
        outcomes.extend(synth_trials(&spec, trials_per_realization)?);
    }
    Ok(SarCurve::from_outcomes(None, outcomes))
}
