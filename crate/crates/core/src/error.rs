use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library and the CLI pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("size {size} exceeds the limit of {limit} for {what}")]
    Size {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("outside the domain of {what}: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("fit failed: {reason} ({usable} usable points)")]
    Fit { reason: String, usable: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no input records in {0}")]
    EmptyInput(PathBuf),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI for this error class.
    ///
    /// | code | meaning |
    /// |------|---------|
    /// | 3 | config |
    /// | 4 | I/O |
    /// | 5 | fit |
    /// | 6 | validation, parameter, domain, size, numeric |
    /// | 7 | empty input |
    ///
    /// Code 2 is left to argument parsing errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 3,
            Error::Io { .. } => 4,
            Error::Fit { .. } => 5,
            Error::Parameter { .. }
            | Error::Validation(_)
            | Error::Size { .. }
            | Error::Domain { .. }
            | Error::Numeric(_) => 6,
            Error::EmptyInput(_) => 7,
        }
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{p} is not a probability in [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("{x} must be positive and finite")))
    }
}
