//! On-disk formats: JSONL transcripts and CSV tables.
//!
//! JSON lines are compact with keys in declaration order; CSV uses `.` as
//! the decimal mark and LF line endings. Floats are written in Rust's
//! shortest round-trip form with a mandatory fraction (`1.0`, `0.25`).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{SarCurve, SarPoint, TrialRecord};
use crate::tasks::TaskKind;

/// One model answer, matched to an instance by `(task, n, seed)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLine {
    pub task: TaskKind,
    pub n: usize,
    pub seed: u64,
    pub model: String,
    pub response: String,
}

/// A judged response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLine {
    pub task: TaskKind,
    pub n: usize,
    pub seed: u64,
    pub model: String,
    pub response: String,
    pub parsed: Option<String>,
    pub strict: bool,
    pub relaxed: bool,
}

impl From<&TrialRecord> for TrialLine {
    fn from(r: &TrialRecord) -> Self {
        TrialLine {
            task: r.instance.kind,
            n: r.instance.n,
            seed: r.instance.seed,
            model: r.responder.clone(),
            response: r.raw_response.clone(),
            parsed: r.parsed.clone(),
            strict: r.strict_correct,
            relaxed: r.relaxed_correct,
        }
    }
}

/// A line of the judge's rejects file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectLine {
    pub line: usize,
    pub reason: String,
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        let line = serde_json::to_string(&item).map_err(|e| Error::Validation(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a JSONL file, returning each parsed line with its 1-based number,
/// or the line number and the reason it was rejected. Blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, std::result::Result<T, String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push((idx + 1, serde_json::from_str(&line).map_err(|e| e.to_string())));
    }
    Ok(out)
}

/// Like [`read_jsonl`] but the first malformed line is an error.
pub fn read_jsonl_strict<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_jsonl(path)?
        .into_iter()
        .map(|(line, r)| r.map_err(|e| Error::Validation(format!("{}:{line}: {e}", path.display()))))
        .collect()
}

/// `1.0`, `0.25`, `NaN`: shortest round-trip with a fraction.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub const CURVE_HEADER: [&str; 6] = ["n", "trials", "successes", "sar", "ci_low", "ci_high"];

pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = create(path)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    let csv_err = |e: csv::Error| Error::Validation(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_curve(path: &Path, curve: &SarCurve) -> Result<()> {
    write_table(
        path,
        &CURVE_HEADER,
        curve.points.iter().map(|p| {
            vec![
                p.n.to_string(),
                p.trials.to_string(),
                p.successes.to_string(),
                fmt_f64(p.estimate),
                fmt_f64(p.ci_low),
                fmt_f64(p.ci_high),
            ]
        }),
    )
}

/// Reads a curve CSV. Counts are authoritative; the other columns are recomputed.
pub fn read_curve(path: &Path) -> Result<SarCurve> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Validation(format!("{}: {other:?}", path.display())),
    })?;
    let header = reader
        .headers()
        .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?
        .clone();
    if header.iter().take(3).ne(CURVE_HEADER.iter().take(3).copied()) {
        return Err(Error::Validation(format!(
            "{}: header must start with n,trials,successes",
            path.display()
        )));
    }
    let mut points: Vec<SarPoint> = Vec::new();
    for (idx, row) in reader.records().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::Validation(format!("{}:{line}: {e}", path.display())))?;
        let field = |i: usize| -> Result<u64> {
            row.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Validation(format!("{}:{line}: bad `{}`", path.display(), CURVE_HEADER[i])))
        };
        let point = SarPoint::new(field(0)? as usize, field(2)?, field(1)?)
            .map_err(|e| Error::Validation(format!("{}:{line}: {e}", path.display())))?;
        if points.last().is_some_and(|p| p.n >= point.n) {
            return Err(Error::Validation(format!(
                "{}:{line}: lengths must be strictly increasing",
                path.display()
            )));
        }
        points.push(point);
    }
    Ok(SarCurve { kind: None, points })
}
