use thiserror::Error;

/// Errors raised by the polyhedral operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NotSurjective: rank {rank} < codomain dim {codomain}")]
    NotSurjective { rank: usize, codomain: usize },
    #[error("KernelNotContained: functional does not vanish on kernel vector {index}")]
    KernelNotContained { index: usize },
    #[error("ZeroDirection: elimination direction must be nonzero")]
    ZeroDirection,
    #[error("PreconditionViolated: {0}")]
    PreconditionViolated(String),
    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrix data has {found} entries, expected {expected}")]
    MalformedMatrix { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
