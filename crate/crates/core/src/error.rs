use thiserror::Error;

/// Errors produced anywhere in the clustering toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SscError {
    #[error("matrix is rank deficient (smallest/largest singular value {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("numerical routine failed to converge: {0}")]
    ConvergenceFailure(&'static str),

    #[error("index {index} out of range for {len} points")]
    InvalidIndex { index: usize, len: usize },

    #[error("coefficient matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("coefficient matrix has nonzero diagonal entry at {0}")]
    NonzeroDiagonal(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("basis is not orthonormal (Gram error {0:e})")]
    NotOrthonormal(f64),

    #[error("invalid number of clusters {l} for {n} points")]
    InvalidL { l: usize, n: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SscError {
    fn from(e: std::io::Error) -> Self {
        SscError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SscError>;
