//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (shape, range, finiteness).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The factorization met a pivot below the singularity guard.
    #[error(
        "singular system: pivot {pivot:.3e} at row {index} is below the guard {threshold:.3e}"
    )]
    Singular {
        index: usize,
        pivot: f64,
        threshold: f64,
    },

    /// The solved system does not satisfy the KKT equations to tolerance.
    #[error("ill-conditioned system: relative residual {residual:.3e} exceeds {tolerance:.3e}")]
    Residual { residual: f64, tolerance: f64 },

    /// MAPE is undefined when a target is (nearly) zero.
    #[error("target at index {index} is {value:e}, too close to zero for a percentage error")]
    NearZeroTarget { index: usize, value: f64 },

    /// A line of an input file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An input file holds no usable data.
    #[error("{0}: no data rows")]
    EmptyInput(PathBuf),

    /// A model file is truncated, has trailing bytes or bad magic.
    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    /// A model file was written by a newer (or unknown) format version.
    #[error("unsupported model format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    /// An experiment configuration is invalid or could not be parsed.
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical solver, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::Residual { .. })
    }
}
