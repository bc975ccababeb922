use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension {dim} exceeds the enumeration bound of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension {dim} is below the required minimum of {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("non-binary value {value} at position {index}")]
    NonBinary { index: usize, value: u8 },

    #[error("half-vector length {0} is not of the form J(J+1)/2")]
    InvalidHalfVecLength(usize),

    #[error("matrix is not positive definite (pivot {pivot} is {value})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("data contains missing cells where complete data is required")]
    MissingCells,

    #[error("row {0} has every cell missing")]
    EmptyRow(usize),

    #[error("no complete cases remain after listwise deletion")]
    EmptyCompleteCase,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid missingness specification: {0}")]
    InvalidMissingness(String),

    #[error("bisection failed to bracket a root on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("linear system for recovery is rank deficient")]
    RankDeficient,

    #[error("restricted distribution is inconsistent with an Ising model (residual {0:e})")]
    Inconsistent(f64),

    #[error("Gelman-Rubin requires at least two chains of equal length >= 10: {0}")]
    InvalidChains(String),

    #[error("degenerate truth: {0}")]
    DegenerateTruth(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
