use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum NsbfError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shift too large for mesh: particular solution overflowed")]
    ShiftOverflow,

    #[error("shift search failed: no non-vanishing solution found up to lambda = 2^60")]
    ShiftSearchFailed,

    #[error("coefficient recurrence overflow at n = {0}: reduce N1")]
    CoefficientOverflow(usize),

    #[error("oracle failed: {0}")]
    OracleFailed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NsbfError>;
