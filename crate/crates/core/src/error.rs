use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tension overflow: p*h = {0} is too large for sinh/cosh")]
    TensionOverflow(f64),

    #[error("x = {x} lies outside the domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },

    #[error("singular matrix: pivot {pivot} at row {index}")]
    SingularMatrix { index: usize, pivot: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("solution blew up at step {step} (max |delta| = {max_abs:e})")]
    BlowUp { step: usize, max_abs: f64 },

    #[error("snapshot time {0} is not on the time-step grid")]
    OffGridSnapshot(f64),

    #[error("no viable tension parameter: every candidate diverged")]
    NoViableP,
}

pub type Result<T> = std::result::Result<T, Error>;
