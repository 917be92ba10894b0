use thiserror::Error;

/// Errors produced by the linear algebra, compression and time-stepping layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("first column of the stream has zero norm")]
    ZeroInitialColumn,

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("{method} did not reach the target residual after {iterations} iterations (relative residual {residual:e})")]
    SolverDiverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{0} did not converge within the iteration cap")]
    NoConvergence(&'static str),

    #[error("grid is not uniform (max/min step ratio {ratio})")]
    NonUniformGrid { ratio: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
