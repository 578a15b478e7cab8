use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("CFL safety factor must lie in (0, 1), got {0}")]
    InvalidSigma(f64),

    #[error("argument {name} = {value} outside [0, 1]")]
    OutOfDomain { name: &'static str, value: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: expected ({expected_x}, {expected_v}), got ({actual_x}, {actual_v})")]
    ShapeMismatch {
        expected_x: usize,
        expected_v: usize,
        actual_x: usize,
        actual_v: usize,
    },

    #[error("CFL violation at node (i = {i}, j = {j}): Courant sum {courant} >= 1")]
    CflViolation { i: usize, j: isize, courant: f64 },

    #[error("degenerate density {rho} at spatial node {i}")]
    DegenerateDensity { i: usize, rho: f64 },

    #[error("non-positive temperature {temp} at spatial node {i}")]
    NegativeTemperature { i: usize, temp: f64 },

    #[error("non-finite value at node (i = {i}, j = {j})")]
    NonFinite { i: usize, j: isize },

    #[error("grids are not node-nested under 2x refinement: {0}")]
    NotNested(String),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("invalid field dump: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at step {step} (t = {t}): {source}")]
    AtStep {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("at level {level} ({n_x}, {n_v}): {source}")]
    AtLevel {
        level: usize,
        n_x: usize,
        n_v: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Strips step/level context, returning the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::AtLevel { source, .. } => source.root(),
            other => other,
        }
    }
}
