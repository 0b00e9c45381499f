use thiserror::Error;

/// Errors raised by the estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fewer than two design points carry positive kernel weight at t = {t}")]
    DegenerateWindow { t: f64 },
    #[error("every candidate bandwidth failed to produce a valid fit")]
    AllDegenerate,
    #[error("fit grid does not cover design point {index}")]
    GridMismatch { index: usize },
    #[error("curve for lag {lag} has no value at half-grid position {position}")]
    MissingMidpoint { lag: usize, position: usize },
    #[error("block size {block} exceeds a quarter of the window length {window}")]
    BlockTooLarge { block: usize, window: usize },
    #[error("probability {0} is outside (0, 1)")]
    DomainError(f64),
    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,
    #[error("linear system is numerically singular")]
    SolveFailure,
    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
