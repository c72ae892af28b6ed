use super::{log_p_tok, CouplingRealization};
use crate::error::{Error, Result};

/// Largest spin count accepted by exhaustive enumeration (2^20 states).
pub const ENUMERATION_MAX_SPINS: usize = 20;

/// `E[s] = -Σ_{i<j} J_ij s_i s_j - h Σ_i s_i`. Spins must be ±1.
pub fn energy(s: &[i8], j: &CouplingRealization, h: f64) -> Result<f64> {
    if s.len() != j.n() {
        return Err(Error::Validation(format!(
            "spin vector has length {} but the couplings are for {} spins",
            s.len(),
            j.n()
        )));
    }
    if s.iter().any(|&x| x != 1 && x != -1) {
        return Err(Error::Validation("spins must be +1 or -1".into()));
    }
    let n = s.len();
    let mut pair = 0.0;
    let mut k = 0;
    for a in 0..n {
        for b in a + 1..n {
            pair += j.upper()[k] * f64::from(s[a] * s[b]);
            k += 1;
        }
    }
    let field: f64 = s.iter().map(|&x| f64::from(x)).sum();
    Ok(-pair - h * field)
}

fn check_size(n: usize) -> Result<()> {
    if n > ENUMERATION_MAX_SPINS {
        return Err(Error::Size {
            what: "exact enumeration",
            size: n,
            limit: ENUMERATION_MAX_SPINS,
        });
    }
    Ok(())
}

/// Visits all `2^n` states in Gray-code order and calls `visit(state, d)`
/// with `d = E[all up] - E[state]`. Bit `i` of `state` set means spin `i` is down.
fn gray_walk(j: &CouplingRealization, h: f64, mut visit: impl FnMut(usize, f64)) {
    let n = j.n();
    let mut spins = vec![1.0f64; n];
    // Local fields h_i = h + Σ_k J_ik s_k.
    let mut field: Vec<f64> = (0..n).map(|i| h + (0..n).map(|k| j.get(i, k)).sum::<f64>()).collect();
    let mut state = 0usize;
    let mut d = 0.0;
    visit(state, d);
    for step in 1usize..(1 << n) {
        let i = step.trailing_zeros() as usize;
        // Flipping s_i changes -E by -2 s_i h_i.
        d -= 2.0 * spins[i] * field[i];
        spins[i] = -spins[i];
        state ^= 1 << i;
        for (k, f) in field.iter_mut().enumerate() {
            if k != i {
                *f += 2.0 * j.get(i, k) * spins[i];
            }
        }
        visit(state, d);
    }
}

/// Neumaier-compensated `ln Σ e^{x}` accumulated in one pass.
struct LogSumExp {
    max: f64,
    sum: f64,
    comp: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        if x > self.max {
            let scale = (self.max - x).exp();
            self.sum *= scale;
            self.comp *= scale;
            self.max = x;
        }
        let term = (x - self.max).exp();
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.max + (self.sum + self.comp).ln()
    }
}

/// `ln p_J[all +1]` by exhaustive enumeration.
pub fn sar_exact_realization_log(j: &CouplingRealization, h: f64) -> Result<f64> {
    check_size(j.n())?;
    if j.is_zero() {
        return Ok(j.n() as f64 * log_p_tok(h));
    }
    let mut lse = LogSumExp::new();
    gray_walk(j, h, |_, d| lse.add(d));
    Ok(-lse.value())
}

/// `p_J[all +1] = e^{-E[1]} / Z_J`, exact for `n ≤ 20`.
pub fn sar_exact_realization(j: &CouplingRealization, h: f64) -> Result<f64> {
    sar_exact_realization_log(j, h).map(f64::exp)
}

/// Log-probabilities of every state, indexed by the down-spin bit mask.
pub fn log_probabilities(j: &CouplingRealization, h: f64) -> Result<Vec<f64>> {
    check_size(j.n())?;
    let mut rel = vec![0.0; 1 << j.n()];
    let mut lse = LogSumExp::new();
    gray_walk(j, h, |state, d| {
        rel[state] = d;
        lse.add(d);
    });
    let log_z = lse.value();
    for x in &mut rel {
        *x -= log_z;
    }
    Ok(rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sk::{sample_couplings, sar_independent, SkParams};

    fn spins_of(state: usize, n: usize) -> Vec<i8> {
        (0..n).map(|i| if state >> i & 1 == 1 { -1 } else { 1 }).collect()
    }

    fn naive_energy(s: &[i8], j: &CouplingRealization, h: f64) -> f64 {
        let n = s.len();
        let mut e = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a < b {
                    e -= j.get(a, b) * f64::from(s[a]) * f64::from(s[b]);
                }
            }
            e -= h * f64::from(s[a]);
        }
        e
    }

    #[test]
    fn energy_examples() {
        let z = CouplingRealization::zeros(5);
        assert_eq!(energy(&[1; 5], &z, 2.0).unwrap(), -10.0);
        let j = CouplingRealization::new(2, vec![0.7], 0).unwrap();
        assert!((energy(&[1, 1], &j, 0.3).unwrap() - (-0.7 - 0.6)).abs() < 1e-15);
        assert!(energy(&[1, 1, 1], &j, 0.3).is_err());
        assert!(energy(&[1, 0], &j, 0.3).is_err());
    }

    #[test]
    fn energy_matches_double_loop_and_flip_symmetry() {
        let mut rng = SeededRng::new(5);
        for trial in 0..50 {
            let n = 2 + trial % 9;
            let j = sample_couplings(&SkParams::new(n, 0.8, 0.0).unwrap(), trial as u64).unwrap();
            let s: Vec<i8> = (0..n).map(|_| if rng.bernoulli(0.5) { 1 } else { -1 }).collect();
            let h = rng.normal(0.0, 1.0);
            assert!((energy(&s, &j, h).unwrap() - naive_energy(&s, &j, h)).abs() < 1e-12);
            let flipped: Vec<i8> = s.iter().map(|x| -x).collect();
            assert!((energy(&s, &j, 0.0).unwrap() - energy(&flipped, &j, 0.0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gray_walk_energies_match_direct() {
        let j = sample_couplings(&SkParams::new(7, 0.6, 0.0).unwrap(), 9).unwrap();
        let h = 0.4;
        let e_up = energy(&[1; 7], &j, h).unwrap();
        let mut seen = vec![false; 1 << 7];
        gray_walk(&j, h, |state, d| {
            seen[state] = true;
            let e = energy(&spins_of(state, 7), &j, h).unwrap();
            assert!((d - (e_up - e)).abs() < 1e-12);
        });
        assert!(seen.iter().all(|&v| v));
    }

    #[test]
    fn two_spin_hand_enumeration() {
        let j = CouplingRealization::new(2, vec![0.5], 0).unwrap();
        let (a, b, c) = (2.5f64.exp(), (-0.5f64).exp(), (-1.5f64).exp());
        let expect = a / (a + 2.0 * b + c);
        let got = sar_exact_realization(&j, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-15);
        assert!((got - 0.894_542_576_383_608).abs() < 1e-14);
    }

    #[test]
    fn limits() {
        let z = CouplingRealization::zeros(6);
        assert_eq!(sar_exact_realization(&z, 0.8).unwrap(), sar_independent(6, 0.8));
        let j = sample_couplings(&SkParams::new(6, 1.0, 0.0).unwrap(), 1).unwrap();
        assert!((sar_exact_realization(&j, 50.0).unwrap() - 1.0).abs() < 1e-12);
        let big = CouplingRealization::zeros(21);
        assert!(matches!(sar_exact_realization(&big, 1.0), Err(Error::Size { .. })));
    }

    #[test]
    fn zero_coupling_matches_factorized_product_without_shortcut() {
        // A negligible nonzero coupling forces the enumeration path.
        for n in 1..=10 {
            let mut c = vec![0.0; n * (n - 1) / 2];
            if let Some(first) = c.first_mut() {
                *first = 1e-300;
            }
            let j = CouplingRealization::new(n, c, 0).unwrap();
            for &h in &[0.0, 1.0, 3.0] {
                let got = sar_exact_realization(&j, h).unwrap();
                assert!((got / sar_independent(n, h) - 1.0).abs() < 1e-13, "n={n} h={h}");
            }
        }
    }

    #[test]
    fn normalization_and_gauge() {
        for (n, seed) in [(1usize, 1u64), (4, 2), (9, 3), (12, 4)] {
            let j = sample_couplings(&SkParams::new(n, 0.7, 0.0).unwrap(), seed).unwrap();
            let lp = log_probabilities(&j, 0.9).unwrap();
            let total: f64 = lp.iter().map(|x| x.exp()).sum();
            assert!((total - 1.0).abs() < 1e-10);
            assert!((lp[0] - sar_exact_realization_log(&j, 0.9).unwrap()).abs() < 1e-12);

            let lp0 = log_probabilities(&j, 0.0).unwrap();
            let all_down = (1 << n) - 1;
            assert!((lp0[0].exp() - lp0[all_down].exp()).abs() < 1e-12);
        }
    }
}
