use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix of dimension {0} exceeds the dense limit of {max}", max = crate::graph::MAX_DENSE_NODES)]
    TooLarge(usize),

    #[error("no connected graph after {0} attempts")]
    NotConnected(usize),

    #[error("process is not stationary: {0}")]
    NonStationary(String),

    #[error("spectrum has complex eigenvalues; only the directed bound is available")]
    ComplexSpectrum,

    #[error("eigensolver did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("rank-deficient design matrix ({cols} columns, numerical rank {rank})")]
    RankDeficient { cols: usize, rank: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no input: {0}")]
    NoInput(String),

    #[error("malformed input in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DimensionMismatch { .. }
                | Error::TooLarge(_)
                | Error::Parse { .. }
                | Error::NoInput(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
