use thiserror::Error;

/// Errors raised by the geometry and group engines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("generator index {index} out of range for rank {rank}")]
    LetterOutOfRange { index: i32, rank: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("operation needs a non-identity element")]
    IdentityElement,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("cloud size {size} exceeds cap {cap} even after grid snapping")]
    CapExceeded { cap: usize, size: usize },
    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("point lies outside the convex hull")]
    OutsideHull,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
