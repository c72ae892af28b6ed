use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest string length accepted by [`matrix_oracle`].
pub const MATRIX_ORACLE_MAX_SITES: usize = 6;

/// Element of the phase group {+1, +i, -1, -i}, stored as the exponent `k` of `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    /// All four elements in the state order (1, i, -1, -i).
    pub const ALL: [Phase; 4] = [Phase::ONE, Phase::I, Phase::MINUS_ONE, Phase::MINUS_I];

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    /// Exponent `k` in `i^k`; also the index of the phase in the state order.
    pub fn exponent(self) -> usize {
        self.0 as usize
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        ["+1", "+i", "-1", "-i"][self.0 as usize]
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Phase> {
        match s {
            "+1" | "1" => Ok(Phase::ONE),
            "+i" | "i" => Ok(Phase::I),
            "-1" => Ok(Phase::MINUS_ONE),
            "-i" => Ok(Phase::MINUS_I),
            other => Err(Error::Validation(format!("unknown phase token {other:?}"))),
        }
    }
}

impl From<Phase> for String {
    fn from(p: Phase) -> String {
        p.as_str().to_string()
    }
}

impl TryFrom<String> for Phase {
    type Error = Error;
    fn try_from(s: String) -> Result<Phase> {
        s.parse()
    }
}

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [Complex64; 4] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [one, o, o, one],
            Pauli::X => [o, one, one, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [one, o, o, -one],
        }
    }
}

/// Product `p × q = φ · r` of two single-site operators.
pub fn mul_single(p: Pauli, q: Pauli) -> (Phase, Pauli) {
    use Pauli::*;
    match (p, q) {
        (I, r) | (r, I) => (Phase::ONE, r),
        (a, b) if a == b => (Phase::ONE, I),
        (X, Y) => (Phase::I, Z),
        (Y, X) => (Phase::MINUS_I, Z),
        (Y, Z) => (Phase::I, X),
        (Z, Y) => (Phase::MINUS_I, X),
        (Z, X) => (Phase::I, Y),
        (X, Z) => (Phase::MINUS_I, Y),
        _ => unreachable!("all sixteen pairs are covered"),
    }
}

/// `phase · P_1 ⊗ … ⊗ P_N`, rendered canonically as `"<phase> <letters>"`, e.g. `+i ZI`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Validation("a Pauli string needs at least one site".into()));
        }
        Ok(PauliString { phase, ops })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(Phase::ONE, vec![Pauli::I; n])
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn letters(&self) -> String {
        self.ops.iter().map(|p| p.as_char()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.phase, self.letters())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses the canonical form `"<phase> <letters>"`.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, letters) = s
            .split_once(' ')
            .ok_or_else(|| Error::Validation(format!("expected \"<phase> <letters>\", got {s:?}")))?;
        let phase: Phase = phase.parse()?;
        let ops = letters
            .chars()
            .enumerate()
            .map(|(pos, c)| {
                Pauli::from_char(c).ok_or_else(|| {
                    Error::Validation(format!("character {c:?} at position {pos} is not one of I, X, Y, Z"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(phase, ops)
    }
}

/// Sitewise product with the accumulated phase `α₁ α₂ ∏ φ_ℓ`.
pub fn mul_strings(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "cannot multiply Pauli strings of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut phase = a.phase * b.phase;
    let ops = a
        .ops
        .iter()
        .zip(&b.ops)
        .map(|(&p, &q)| {
            let (local, r) = mul_single(p, q);
            phase = phase * local;
            r
        })
        .collect();
    Ok(PauliString { phase, ops })
}

impl Mul for &PauliString {
    type Output = Result<PauliString>;
    fn mul(self, rhs: &PauliString) -> Result<PauliString> {
        mul_strings(self, rhs)
    }
}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        DenseMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn kron(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let dim = self.dim * rhs.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, j) in (0..self.dim).flat_map(|i| (0..self.dim).map(move |j| (i, j))) {
            let a = self.get(i, j);
            for (k, l) in (0..rhs.dim).flat_map(|k| (0..rhs.dim).map(move |l| (k, l))) {
                data[(i * rhs.dim + k) * dim + j * rhs.dim + l] = a * rhs.get(k, l);
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.get(k, j);
                }
            }
        }
        DenseMatrix { dim: n, data }
    }

    pub fn scale(mut self, c: Complex64) -> DenseMatrix {
        self.data.iter_mut().for_each(|x| *x *= c);
        self
    }
}

/// Dense `2^N × 2^N` matrix of a Pauli string (site 1 is the most significant factor).
pub fn matrix_oracle(s: &PauliString) -> Result<DenseMatrix> {
    if s.len() > MATRIX_ORACLE_MAX_SITES {
        return Err(Error::Size {
            what: "dense Pauli matrix",
            size: s.len(),
            limit: MATRIX_ORACLE_MAX_SITES,
        });
    }
    let m = s.ops.iter().fold(DenseMatrix::identity(1), |acc, p| {
        acc.kron(&DenseMatrix {
            dim: 2,
            data: p.matrix().to_vec(),
        })
    });
    Ok(m.scale(s.phase.to_complex()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_rules() {
        use Pauli::*;
        assert_eq!(mul_single(X, Y), (Phase::I, Z));
        assert_eq!(mul_single(I, Z), (Phase::ONE, Z));
        assert_eq!(mul_single(Y, X), (Phase::MINUS_I, Z));
        assert_eq!(mul_single(Z, Z), (Phase::ONE, I));
        assert_eq!(mul_single(Y, Z), (Phase::I, X));
        assert_eq!(mul_single(Z, X), (Phase::I, Y));
        assert_eq!(mul_single(X, Z), (Phase::MINUS_I, Y));
    }

    #[test]
    fn single_site_rules_match_matrices() {
        for p in Pauli::ALL {
            for q in Pauli::ALL {
                let (phi, r) = mul_single(p, q);
                let a = PauliString::new(Phase::ONE, vec![p]).unwrap();
                let b = PauliString::new(Phase::ONE, vec![q]).unwrap();
                let c = PauliString::new(phi, vec![r]).unwrap();
                let lhs = matrix_oracle(&a).unwrap().matmul(&matrix_oracle(&b).unwrap());
                assert_eq!(lhs, matrix_oracle(&c).unwrap(), "{p:?} x {q:?}");
            }
        }
    }

    #[test]
    fn string_products() {
        assert_eq!(mul_strings(&ps("+1 XY"), &ps("+1 YY")).unwrap(), ps("+i ZI"));
        assert_eq!(mul_strings(&ps("+1 II"), &ps("-i XZ")).unwrap(), ps("-i XZ"));
        assert_eq!(mul_strings(&ps("+1 X"), &ps("+1 X")).unwrap(), ps("+1 I"));
        assert_eq!(mul_strings(&ps("+1 X"), &ps("+1 Y")).unwrap().to_string(), "+i Z");
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(matches!(mul_strings(&ps("+1 X"), &ps("+1 XY")), Err(Error::Validation(_))));
    }

    #[test]
    fn empty_string_rejected() {
        assert!(PauliString::new(Phase::ONE, vec![]).is_err());
        assert!("+1 ".parse::<PauliString>().is_err());
        assert!("+1 XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn oracle_small_cases() {
        let z = matrix_oracle(&ps("+1 Z")).unwrap();
        assert_eq!(z.get(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(z.get(1, 1), Complex64::new(-1.0, 0.0));
        assert_eq!(z.get(0, 1), Complex64::new(0.0, 0.0));
        assert_eq!(matrix_oracle(&ps("+1 I")).unwrap(), DenseMatrix::identity(2));
        assert!(matches!(matrix_oracle(&ps("+1 IIIIIII")), Err(Error::Size { .. })));
    }

    #[test]
    fn phase_display_round_trip() {
        for p in Phase::ALL {
            assert_eq!(p.to_string().parse::<Phase>().unwrap(), p);
        }
        assert_eq!(Phase::I * Phase::I, Phase::MINUS_ONE);
        assert_eq!(Phase::MINUS_I * Phase::I, Phase::ONE);
    }
}
