use thiserror::Error;

/// Errors produced by the inference, sampling and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {flo}, f(hi) = {fhi}")]
    Bracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("did not converge after {iterations} iterations (last measure {last})")]
    Convergence { iterations: usize, last: f64 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("state space too large: {0} configurations")]
    StateSpaceTooLarge(f64),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
