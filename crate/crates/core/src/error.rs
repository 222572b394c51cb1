use thiserror::Error;

/// Errors raised while building or consuming operators, measurements and states.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A measurement reference violates one of its defining invariants.
    #[error("invalid measurement: {invariant} violated{}: {detail}", index.map(|i| format!(" by operator {i}")).unwrap_or_default())]
    InvalidMeasurement {
        invariant: &'static str,
        index: Option<usize>,
        detail: String,
    },

    #[error("witness is not certified (dephased minimum eigenvalue {min_eigenvalue:e})")]
    UncertifiedWitness { min_eigenvalue: f64 },

    #[error("ambiguous degeneracy: cluster diameter exceeds tolerance (gaps {gaps:?})")]
    DegeneracyAmbiguous { gaps: Vec<f64> },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
