//! Run configuration, read from a TOML file.
//!
//! ```toml
//! [task]
//! kind = "cyclic"
//! alphabet_size = 13
//!
//! [grid]
//! lengths = [5, 10, 20]
//! instances_per_n = 3
//! seed = 1
//! criterion = "strict"
//! fixed_inputs = ["ADBAA"]
//!
//! [simulate]
//! j0 = 0.1
//! h = 2.0
//! lengths = [2, 4, 6, 8]
//! realizations = 2000
//! master_seed = 7
//! estimator = "antithetic_control_variate"
//! trials_per_realization = 20
//!
//! [plan]
//! alpha = 1.2
//! beta0 = 0.001
//! theta = 1.0
//! n = 30
//! k_max = 5
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Every section is optional; each subcommand checks the ones it needs.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scoring::Criterion;
use crate::sk::Estimator;
use crate::tasks::{TaskKind, TaskParams};

/// Environment variable overriding `[output] dir` (but not `--out`).
pub const OUT_DIR_ENV: &str = "SEQCLIFF_OUT_DIR";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<TaskSection>,
    pub grid: Option<GridSection>,
    pub simulate: Option<SimulateSection>,
    pub plan: Option<PlanSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKind,
    pub alphabet_size: Option<u32>,
}

impl TaskSection {
    pub fn params(&self) -> Result<TaskParams> {
        match (self.kind, self.alphabet_size) {
            (TaskKind::Cyclic, Some(a)) => Ok(TaskParams::cyclic(a)),
            (TaskKind::Cyclic, None) => Err(config_err("task.alphabet_size", "required for the cyclic task")),
            (_, Some(_)) => Err(config_err("task.alphabet_size", "only valid for the cyclic task")),
            (TaskKind::Addition, None) | (TaskKind::Pauli, None) => Ok(TaskParams::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lengths: Vec<usize>,
    #[serde(default = "one")]
    pub instances_per_n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub criterion: Criterion,
    /// Inputs emitted verbatim (after the random ones), in task input format.
    #[serde(default)]
    pub fixed_inputs: Vec<String>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub j0: f64,
    pub h: f64,
    pub lengths: Vec<usize>,
    pub realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
    /// When set, also write a synthetic-agent curve with this many trials per realization.
    pub trials_per_realization: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub alpha: f64,
    pub beta0: f64,
    #[serde(default = "unit_theta")]
    pub theta: f64,
    pub n: f64,
    pub k_max: usize,
}

fn unit_theta() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

pub(crate) fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_lengths(field: &str, lengths: &[usize]) -> Result<()> {
    if lengths.is_empty() {
        return Err(config_err(field, "must not be empty"));
    }
    if lengths[0] == 0 {
        return Err(config_err(field, "lengths must be at least 1"));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_err(field, "must be strictly increasing"));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let field = e.span().map_or_else(|| "<file>".to_string(), |s| format!("<file> bytes {}..{}", s.start, s.end));
            config_err(&field, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(task) = &self.task {
            task.params()?;
        }
        if let Some(grid) = &self.grid {
            check_lengths("grid.lengths", &grid.lengths)?;
            if grid.instances_per_n == 0 {
                return Err(config_err("grid.instances_per_n", "must be at least 1"));
            }
        }
        if let Some(sim) = &self.simulate {
            check_lengths("simulate.lengths", &sim.lengths)?;
            if sim.realizations == 0 {
                return Err(config_err("simulate.realizations", "must be at least 1"));
            }
            if !(sim.j0 >= 0.0 && sim.j0.is_finite()) {
                return Err(config_err("simulate.j0", "must be nonnegative and finite"));
            }
            if !sim.h.is_finite() {
                return Err(config_err("simulate.h", "must be finite"));
            }
            if sim.trials_per_realization == Some(0) {
                return Err(config_err("simulate.trials_per_realization", "must be at least 1"));
            }
        }
        if let Some(plan) = &self.plan {
            if plan.k_max == 0 {
                return Err(config_err("plan.k_max", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn task(&self) -> Result<&TaskSection> {
        self.task.as_ref().ok_or_else(|| config_err("task", "section is required"))
    }

    pub fn grid(&self) -> Result<&GridSection> {
        self.grid.as_ref().ok_or_else(|| config_err("grid", "section is required"))
    }

    pub fn simulate(&self) -> Result<&SimulateSection> {
        self.simulate.as_ref().ok_or_else(|| config_err("simulate", "section is required"))
    }

    /// Output directory: the `--out` flag, then the environment override, then
    /// `[output] dir`, then the working directory.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            return PathBuf::from(dir);
        }
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
