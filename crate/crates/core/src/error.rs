use thiserror::Error;

/// Errors raised by the simulation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// `H² ≥ budget`, so no real low level exists.
    #[error("no valid low level: H² = {high_sq} is not below the budget {budget}")]
    NoValidLow { high_sq: f64, budget: f64 },
    /// The derived low level is not strictly below the high level.
    #[error("degenerate power pair: L = {low} is not below H = {high}")]
    DegeneratePair { low: f64, high: f64 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("no feasible candidate in the level scan")]
    NoCandidate,
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
