//! Deterministic benchmark instances and their exact ground truth.
//!
//! Three task kinds are supported:
//!
//! * **cyclic**: shift every letter of a string over the first `alphabet_size`
//!   uppercase letters by one, wrapping around (`ADBAA → BACBB` for size 4);
//! * **addition**: add two `n`-digit decimal integers (`1234 + 5678 → 6912`);
//! * **pauli**: multiply two phased Pauli strings on `n` sites (`+1 X * +1 Y → +i Z`).
//!
//! An instance is a pure function of `(kind, n, seed, params)`; the input
//! payloads are sampled uniformly with [`SeededRng`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{mul_strings, Pauli, PauliString, Phase};
use crate::rng::SeededRng;

pub const MIN_ALPHABET: u32 = 2;
pub const MAX_ALPHABET: u32 = 26;

/// Separator between the two operands of an addition input.
pub const ADDITION_SEPARATOR: &str = " + ";
/// Separator between the two factors of a Pauli input.
pub const PAULI_SEPARATOR: &str = " * ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Cyclic,
    Addition,
    Pauli,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Cyclic => "cyclic",
            TaskKind::Addition => "addition",
            TaskKind::Pauli => "pauli",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(TaskKind::Cyclic),
            "addition" => Ok(TaskKind::Addition),
            "pauli" => Ok(TaskKind::Pauli),
            other => Err(Error::Validation(format!("unknown task kind {other:?}"))),
        }
    }
}

/// Task parameters; serialized as `{"alphabet_size":13}`, `{"digits":4}` or `{}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaskParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<usize>,
}

impl TaskParams {
    pub fn cyclic(alphabet_size: u32) -> Self {
        TaskParams {
            alphabet_size: Some(alphabet_size),
            digits: None,
        }
    }

    pub fn addition(digits: usize) -> Self {
        TaskParams {
            alphabet_size: None,
            digits: Some(digits),
        }
    }

    pub fn pauli() -> Self {
        TaskParams::default()
    }
}

/// One problem with its unique answer. Field order is the JSONL line order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    #[serde(rename = "task")]
    pub kind: TaskKind,
    pub n: usize,
    pub seed: u64,
    pub params: TaskParams,
    pub input: String,
    pub expected: String,
}

impl TaskInstance {
    /// Builds an instance around a given input, computing `n` and the answer.
    pub fn from_input(kind: TaskKind, params: TaskParams, seed: u64, input: &str) -> Result<Self> {
        let (n, expected) = match kind {
            TaskKind::Cyclic => {
                let size = cyclic_alphabet(&params)?;
                (input.chars().count(), cyclic_oracle(input, size)?)
            }
            TaskKind::Addition => {
                let (a, b) = split_operands(input, ADDITION_SEPARATOR)?;
                if a.len() != b.len() {
                    return Err(Error::Validation(format!(
                        "addition operands have {} and {} digits",
                        a.len(),
                        b.len()
                    )));
                }
                if let Some(d) = params.digits {
                    if d != a.len() {
                        return Err(Error::Validation(format!(
                            "params say {d} digits but operands have {}",
                            a.len()
                        )));
                    }
                }
                (a.len(), addition_oracle(a, b)?)
            }
            TaskKind::Pauli => {
                let (a, b) = split_operands(input, PAULI_SEPARATOR)?;
                let a: PauliString = a.parse()?;
                let b: PauliString = b.parse()?;
                (a.len(), mul_strings(&a, &b)?.to_string())
            }
        };
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        let params = match kind {
            TaskKind::Addition => TaskParams::addition(n),
            _ => params,
        };
        Ok(TaskInstance {
            kind,
            n,
            seed,
            params,
            input: input.to_string(),
            expected,
        })
    }

    /// Recomputes the answer from the input and checks every stored field.
    pub fn verify(&self) -> Result<()> {
        let fresh = TaskInstance::from_input(self.kind, self.params, self.seed, &self.input)?;
        if fresh.n != self.n {
            return Err(Error::Validation(format!(
                "stored n = {} but input has length {}",
                self.n, fresh.n
            )));
        }
        if fresh.expected != self.expected {
            return Err(Error::Validation(format!(
                "stored answer {:?} differs from oracle {:?}",
                self.expected, fresh.expected
            )));
        }
        Ok(())
    }

    /// Regenerates the instance from `(kind, n, seed, params)`.
    pub fn generate(kind: TaskKind, n: usize, seed: u64, params: TaskParams) -> Result<Self> {
        match kind {
            TaskKind::Cyclic => gen_cyclic(cyclic_alphabet(&params)?, n, seed),
            TaskKind::Addition => gen_addition(n, seed),
            TaskKind::Pauli => gen_pauli(n, seed),
        }
    }
}

fn cyclic_alphabet(params: &TaskParams) -> Result<u32> {
    let size = params
        .alphabet_size
        .ok_or_else(|| Error::param("alphabet_size", "required for the cyclic task"))?;
    check_alphabet(size)?;
    Ok(size)
}

fn check_alphabet(size: u32) -> Result<()> {
    if (MIN_ALPHABET..=MAX_ALPHABET).contains(&size) {
        Ok(())
    } else {
        Err(Error::param(
            "alphabet_size",
            format!("{size} is outside [{MIN_ALPHABET}, {MAX_ALPHABET}]"),
        ))
    }
}

fn check_length(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("n", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn split_operands<'a>(input: &'a str, sep: &str) -> Result<(&'a str, &'a str)> {
    input
        .split_once(sep)
        .ok_or_else(|| Error::Validation(format!("expected two operands separated by {sep:?} in {input:?}")))
}

fn letter(index: u32) -> char {
    char::from(b'A' + index as u8)
}

/// Shifts every letter one step forward, wrapping at `alphabet_size`.
pub fn cyclic_oracle(input: &str, alphabet_size: u32) -> Result<String> {
    check_alphabet(alphabet_size)?;
    input
        .chars()
        .enumerate()
        .map(|(pos, c)| {
            let idx = (c as u32).wrapping_sub('A' as u32);
            if c.is_ascii_uppercase() && idx < alphabet_size {
                Ok(letter((idx + 1) % alphabet_size))
            } else {
                Err(Error::Validation(format!(
                    "character {c:?} at position {pos} is outside the first {alphabet_size} letters"
                )))
            }
        })
        .collect()
}

pub fn gen_cyclic(alphabet_size: u32, n: usize, seed: u64) -> Result<TaskInstance> {
    check_alphabet(alphabet_size)?;
    check_length(n)?;
    let mut rng = SeededRng::new(seed);
    let input: String = (0..n)
        .map(|_| letter(rng.below(alphabet_size as u64) as u32))
        .collect();
    TaskInstance::from_input(TaskKind::Cyclic, TaskParams::cyclic(alphabet_size), seed, &input)
}

/// Exact decimal sum by schoolbook carry propagation.
///
/// Operands may differ in length and may carry leading zeros; the result has
/// no leading zeros unless it is `"0"`.
pub fn addition_oracle(a: &str, b: &str) -> Result<String> {
    for (name, s) in [("a", a), ("b", b)] {
        if s.is_empty() {
            return Err(Error::Validation(format!("operand {name} is empty")));
        }
        if let Some((pos, c)) = s.char_indices().find(|(_, c)| !c.is_ascii_digit()) {
            return Err(Error::Validation(format!(
                "operand {name} has non-digit {c:?} at position {pos}"
            )));
        }
    }
    let (a, b) = (a.as_bytes(), b.as_bytes());
    let width = a.len().max(b.len());
    let digit = |s: &[u8], i: usize| -> u8 {
        if i < s.len() {
            s[s.len() - 1 - i] - b'0'
        } else {
            0
        }
    };
    let mut out = Vec::with_capacity(width + 1);
    let mut carry = 0u8;
    for i in 0..width {
        let sum = digit(a, i) + digit(b, i) + carry;
        out.push(b'0' + sum % 10);
        carry = sum / 10;
    }
    if carry > 0 {
        out.push(b'0' + carry);
    }
    while out.len() > 1 && out.last() == Some(&b'0') {
        out.pop();
    }
    out.reverse();
    Ok(String::from_utf8(out).expect("ascii digits"))
}

fn random_operand(rng: &mut SeededRng, digits: usize) -> String {
    (0..digits)
        .map(|i| {
            let d = if i == 0 && digits > 1 {
                1 + rng.below(9)
            } else {
                rng.below(10)
            };
            char::from(b'0' + d as u8)
        })
        .collect()
}

pub fn gen_addition(n_digits: usize, seed: u64) -> Result<TaskInstance> {
    check_length(n_digits)?;
    let mut rng = SeededRng::new(seed);
    let a = random_operand(&mut rng, n_digits);
    let b = random_operand(&mut rng, n_digits);
    let input = format!("{a}{ADDITION_SEPARATOR}{b}");
    TaskInstance::from_input(TaskKind::Addition, TaskParams::addition(n_digits), seed, &input)
}

/// Uniformly random phased Pauli string on `n` sites.
pub fn random_pauli_string(rng: &mut SeededRng, n: usize) -> Result<PauliString> {
    let phase = Phase::from_exponent(rng.below(4) as u32);
    let ops = (0..n).map(|_| Pauli::ALL[rng.below(4) as usize]).collect();
    PauliString::new(phase, ops)
}

pub fn gen_pauli(n: usize, seed: u64) -> Result<TaskInstance> {
    check_length(n)?;
    let mut rng = SeededRng::new(seed);
    let a = random_pauli_string(&mut rng, n)?;
    let b = random_pauli_string(&mut rng, n)?;
    let input = format!("{a}{PAULI_SEPARATOR}{b}");
    TaskInstance::from_input(TaskKind::Pauli, TaskParams::pauli(), seed, &input)
}
