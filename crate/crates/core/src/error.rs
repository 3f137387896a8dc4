use thiserror::Error;

/// Errors raised by the numerical routines and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("time grid must be strictly increasing and positive (index {index})")]
    NonIncreasingGrid { index: usize },
    #[error("vectors are rank deficient (residual norm {norm:e} at index {index})")]
    RankDeficient { index: usize, norm: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("zero-length vector")]
    ZeroVector,
    #[error("probability {0} outside (0, 1)")]
    OutOfDomain(f64),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("directions are not orthogonal (max |VᵀV - I| = {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("stratum bound interval has zero probability mass at direction {direction}")]
    EmptyBoundInterval { direction: usize },
    #[error("every per-stratum standard deviation is zero")]
    AllZeroSigma,
    #[error("gradient norm {norm:e} too small to define a direction")]
    DegenerateGradient { norm: f64 },
    #[error("generated directions are linearly dependent (direction {index})")]
    DependentDirections { index: usize },
    #[error("projection residual of column {column} vanished")]
    DegenerateColumn { column: usize },
    #[error("Feller condition violated: 2·alpha·mu = {lhs} <= sigma^2 = {rhs}")]
    InvalidFeller { lhs: f64, rhs: f64 },
    #[error("zero-noise path value {value} at step {step} is negative")]
    NegativePathValue { step: usize, value: f64 },
    #[error("sample covariance is degenerate")]
    DegenerateCovariance,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error in `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("{cell}: {source}")]
    Cell { cell: String, source: Box<Error> },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for configuration problems (as opposed to numerical failures).
    pub fn is_config(&self) -> bool {
        match self {
            Error::ConfigInvalid { .. } => true,
            Error::Cell { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
