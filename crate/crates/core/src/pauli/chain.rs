use std::ops::Mul;

use num_traits::Num;
use rayon::prelude::*;

use super::algebra::Phase;
use crate::error::{check_probability, Error, Result};
use crate::rng::SeededRng;

/// Error rates of a noisy agent multiplying Pauli strings.
///
/// Both fields are *error* probabilities: `p_sigma` for a wrong single-site
/// letter and `p_phi` for a wrong phase update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliNoiseParams {
    pub p_sigma: f64,
    pub p_phi: f64,
}

impl PauliNoiseParams {
    pub fn new(p_sigma: f64, p_phi: f64) -> Result<Self> {
        check_probability("p_sigma", p_sigma)?;
        check_probability("p_phi", p_phi)?;
        Ok(PauliNoiseParams { p_sigma, p_phi })
    }
}

/// 4x4 matrix over any numeric field; used with `f64` and with exact rationals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

impl<T: Num + Copy> Mat4<T> {
    pub fn identity() -> Self {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { T::one() } else { T::zero() })
        }))
    }

    pub fn ones() -> Self {
        Mat4([[T::one(); 4]; 4])
    }

    pub fn row_sums(&self) -> [T; 4] {
        self.0.map(|row| row.into_iter().fold(T::zero(), |a, b| a + b))
    }

    pub fn pow(&self, mut n: u32) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    pub fn is_permutation(&self) -> bool {
        let one_per = |cells: [T; 4]| {
            cells.iter().filter(|&&x| x == T::one()).count() == 1
                && cells.iter().all(|&x| x == T::one() || x == T::zero())
        };
        (0..4).all(|i| one_per(self.0[i]) && one_per(std::array::from_fn(|j| self.0[j][i])))
    }
}

impl<T: Num + Copy> Mul for Mat4<T> {
    type Output = Mat4<T>;
    fn mul(self, rhs: Mat4<T>) -> Mat4<T> {
        Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4).fold(T::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j])
            })
        }))
    }
}

/// Markov chain of the accumulated phase over the state order (1, i, -1, -i).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseChain<T> {
    kernel: Mat4<T>,
    shifts: [Mat4<T>; 4],
}

impl<T: Num + Copy> PhaseChain<T> {
    /// Chain whose single update is wrong with probability `p_phi`, each wrong
    /// element equally likely: `K = (1 - p) 1 + (p/3)(J - 1)`.
    pub fn new(p_phi: T) -> Self {
        let three = T::one() + T::one() + T::one();
        let off = p_phi / three;
        let kernel = Mat4(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { T::one() - p_phi } else { off })
        }));
        let shifts = std::array::from_fn(|k| {
            Mat4(std::array::from_fn(|row| {
                std::array::from_fn(|col| if row == (col + k) % 4 { T::one() } else { T::zero() })
            }))
        });
        PhaseChain { kernel, shifts }
    }

    pub fn kernel(&self) -> &Mat4<T> {
        &self.kernel
    }

    /// Permutation implementing left multiplication by `phase`.
    pub fn shift(&self, phase: Phase) -> &Mat4<T> {
        &self.shifts[phase.exponent()]
    }

    /// One-step transition when the true multiplier is `phase`.
    pub fn transition(&self, phase: Phase) -> Mat4<T> {
        *self.shift(phase) * self.kernel
    }

    /// Probability that the register ends at the true product `total` after
    /// `n` updates: `e_Φᵀ S_Φ Kⁿ e_1`.
    pub fn success_by_kernel_power(&self, total: Phase, n: u32) -> T {
        let m = *self.shift(total) * self.kernel.pow(n);
        m.0[total.exponent()][0]
    }
}

/// Closed-form phase-register success `1/4 + 3/4 ((3 - 4p)/3)^n`.
pub fn phase_chain_success(p_phi: f64, n: u32) -> Result<f64> {
    check_probability("p_phi", p_phi)?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let ratio = (3.0 - 4.0 * p_phi) / 3.0;
    Ok(0.25 + 0.75 * ratio.powi(n as i32))
}

fn noisy_multiplier(rng: &mut SeededRng, truth: Phase, p_err: f64) -> Phase {
    if rng.bernoulli(p_err) {
        truth * Phase::from_exponent(1 + rng.below(3) as u32)
    } else {
        truth
    }
}

fn run_phase_register(rng: &mut SeededRng, p_phi: f64, n: u32) -> bool {
    let mut truth = Phase::ONE;
    let mut register = Phase::ONE;
    for _ in 0..n {
        let phi = Phase::from_exponent(rng.below(4) as u32);
        truth = truth * phi;
        register = register * noisy_multiplier(rng, phi, p_phi);
    }
    register == truth
}

fn check_trials(n: u32, trials: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    Ok(())
}

/// Monte Carlo estimate of [`phase_chain_success`]. Trial `t` draws from
/// stream `(seed, t)`, so the result does not depend on scheduling.
pub fn phase_chain_simulate(p_phi: f64, n: u32, trials: u64, seed: u64) -> Result<f64> {
    check_probability("p_phi", p_phi)?;
    check_trials(n, trials)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| run_phase_register(&mut SeededRng::stream(seed, t), p_phi, n))
        .count();
    Ok(hits as f64 / trials as f64)
}

/// Sequence accuracy of the noisy agent: `(1 - p_σ)^n [1/4 + 3/4 ((3 - 4p_φ)/3)^n]`.
pub fn pauli_sar_theory(params: PauliNoiseParams, n: u32) -> Result<f64> {
    let params = PauliNoiseParams::new(params.p_sigma, params.p_phi)?;
    let phase = phase_chain_success(params.p_phi, n)?;
    Ok((1.0 - params.p_sigma).powi(n as i32) * phase)
}

/// Monte Carlo agent with both error channels; converges to [`pauli_sar_theory`].
pub fn pauli_agent_simulate(params: PauliNoiseParams, n: u32, trials: u64, seed: u64) -> Result<f64> {
    let params = PauliNoiseParams::new(params.p_sigma, params.p_phi)?;
    check_trials(n, trials)?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = SeededRng::stream(seed, t);
            let mut letters_ok = true;
            for _ in 0..n {
                letters_ok &= !rng.bernoulli(params.p_sigma);
            }
            let phase_ok = run_phase_register(&mut rng, params.p_phi, n);
            letters_ok && phase_ok
        })
        .count();
    Ok(hits as f64 / trials as f64)
}
