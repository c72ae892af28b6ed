//! Turning raw model responses into verdicts and per-length SAR curves.
//!
//! Answers are extracted with a "last candidate wins" rule, since chat models
//! tend to put the final answer after their working:
//!
//! * cyclic: the last all-uppercase word (preferring words of two or more
//!   letters); if there is none, the last alphabetic word, uppercased;
//! * addition: the last run of digits, where `,` and `_` are accepted as
//!   thousands separators and stripped; leading zeros are dropped;
//! * pauli: the last operator word over `IXYZ` that carries an explicit phase
//!   token (`+1`, `-1`, `+i`, `-i`, `1`, `i`, Unicode minus accepted); failing
//!   that the last bare operator word, read with phase `+1`.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tasks::{TaskInstance, TaskKind};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z]+").unwrap());
static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+(?:[,_]\d{3})*").unwrap());
static PAULI_UPPER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:(?P<sign>[+\-\x{2212}])?\s*\b(?P<unit>1|i)\s+)?\b(?P<ops>[IXYZ]+)\b").unwrap()
});
static PAULI_LOWER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?P<sign>[+\-\x{2212}])?\s*\b(?P<unit>1|i)\s+\b(?P<ops>[ixyz]+)\b").unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Parsed answer equals the ground truth exactly.
    #[default]
    Strict,
    /// Pauli only: operator letters match, phase ignored.
    Relaxed,
}

impl std::str::FromStr for Criterion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Criterion::Strict),
            "relaxed" => Ok(Criterion::Relaxed),
            other => Err(Error::Validation(format!("unknown criterion {other:?}"))),
        }
    }
}

/// A judged attempt at one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub instance: TaskInstance,
    pub responder: String,
    pub raw_response: String,
    pub parsed: Option<String>,
    pub strict_correct: bool,
    pub relaxed_correct: bool,
}

impl TrialRecord {
    pub fn correct(&self, criterion: Criterion) -> bool {
        match criterion {
            Criterion::Strict => self.strict_correct,
            Criterion::Relaxed => self.relaxed_correct,
        }
    }
}

fn normalize_whitespace(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_cyclic(text: &str) -> Option<String> {
    let words: Vec<&str> = WORD.find_iter(text).map(|m| m.as_str()).collect();
    let upper = |w: &str| w.chars().all(|c| c.is_ascii_uppercase());
    words
        .iter()
        .rev()
        .find(|w| upper(w) && w.len() >= 2)
        .or_else(|| words.iter().rev().find(|w| upper(w)))
        .or_else(|| words.last())
        .map(|w| w.to_ascii_uppercase())
}

fn parse_addition(text: &str) -> Option<String> {
    let last = NUMBER.find_iter(text).last()?;
    let digits: String = last.as_str().chars().filter(|c| c.is_ascii_digit()).collect();
    let trimmed = digits.trim_start_matches('0');
    Some(if trimmed.is_empty() { "0".into() } else { trimmed.into() })
}

fn pauli_candidate(caps: &regex::Captures<'_>) -> (bool, String) {
    let explicit = caps.name("unit").is_some();
    let negative = caps
        .name("sign")
        .is_some_and(|s| s.as_str() == "-" || s.as_str() == "\u{2212}");
    let imaginary = caps.name("unit").is_some_and(|u| u.as_str() == "i");
    let phase = match (negative, imaginary) {
        (false, false) => "+1",
        (false, true) => "+i",
        (true, false) => "-1",
        (true, true) => "-i",
    };
    let ops = caps["ops"].to_ascii_uppercase();
    (explicit, format!("{phase} {ops}"))
}

fn parse_pauli(text: &str) -> Option<String> {
    let candidates: Vec<(bool, String)> = PAULI_UPPER.captures_iter(text).map(|c| pauli_candidate(&c)).collect();
    if let Some((_, s)) = candidates.iter().rev().find(|(explicit, _)| *explicit) {
        return Some(s.clone());
    }
    if let Some((_, s)) = candidates.last() {
        return Some(s.clone());
    }
    PAULI_LOWER
        .captures_iter(text)
        .last()
        .map(|c| pauli_candidate(&c).1)
}

/// Extracts the normalized answer from a free-form response; `None` when no
/// candidate is found.
pub fn parse_response(raw: &str, kind: TaskKind) -> Option<String> {
    let text = normalize_whitespace(raw);
    match kind {
        TaskKind::Cyclic => parse_cyclic(&text),
        TaskKind::Addition => parse_addition(&text),
        TaskKind::Pauli => parse_pauli(&text),
    }
}

fn pauli_letters(canonical: &str) -> &str {
    canonical.split_once(' ').map_or(canonical, |(_, ops)| ops)
}

/// Scores one response against an instance.
pub fn judge(instance: &TaskInstance, responder: &str, raw: &str) -> TrialRecord {
    let parsed = parse_response(raw, instance.kind);
    let strict_correct = parsed.as_deref() == Some(instance.expected.as_str());
    let relaxed_correct = match (&parsed, instance.kind) {
        (Some(p), TaskKind::Pauli) => pauli_letters(p) == pauli_letters(&instance.expected),
        _ => strict_correct,
    };
    TrialRecord {
        instance: instance.clone(),
        responder: responder.to_string(),
        raw_response: raw.to_string(),
        parsed,
        strict_correct,
        relaxed_correct,
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    wilson_interval_z(successes, trials, Z_95)
}

pub fn wilson_interval_z(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Clamp so that ci_low <= estimate <= ci_high survives rounding at p = 0 or 1.
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarPoint {
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    #[serde(rename = "sar")]
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SarPoint {
    pub fn new(n: usize, successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 || successes > trials {
            return Err(Error::Validation(format!(
                "point n={n}: {successes} successes out of {trials} trials"
            )));
        }
        let (ci_low, ci_high) = wilson_interval(successes, trials);
        Ok(SarPoint {
            n,
            trials,
            successes,
            estimate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        })
    }
}

/// Success statistics per output length, sorted by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SarCurve {
    /// `None` for synthetic curves not tied to a benchmark task.
    pub kind: Option<TaskKind>,
    pub points: Vec<SarPoint>,
}

impl SarCurve {
    /// Aggregates `(n, success)` outcomes in one pass; order of outcomes is irrelevant.
    pub fn from_outcomes(kind: Option<TaskKind>, outcomes: impl IntoIterator<Item = (usize, bool)>) -> Self {
        let mut tally: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
        for (n, ok) in outcomes {
            let entry = tally.entry(n).or_default();
            entry.0 += ok as u64;
            entry.1 += 1;
        }
        let points = tally
            .into_iter()
            .map(|(n, (s, t))| SarPoint::new(n, s, t).expect("tallies are consistent"))
            .collect();
        SarCurve { kind, points }
    }

    pub fn point(&self, n: usize) -> Option<&SarPoint> {
        self.points.iter().find(|p| p.n == n)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Groups judged records by `n` into a curve under `criterion`.
pub fn sar_curve(records: &[TrialRecord], criterion: Criterion) -> Result<SarCurve> {
    let first = records
        .first()
        .ok_or_else(|| Error::Validation("no records to aggregate".into()))?;
    let kind = first.instance.kind;
    if let Some(other) = records.iter().find(|r| r.instance.kind != kind) {
        return Err(Error::Validation(format!(
            "mixed task kinds in one curve: {kind} and {}",
            other.instance.kind
        )));
    }
    Ok(SarCurve::from_outcomes(
        Some(kind),
        records.iter().map(|r| (r.instance.n, r.correct(criterion))),
    ))
}
