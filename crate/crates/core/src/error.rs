use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NweError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("effect/state pair yields {value}, outside [0, 1]")]
    InvalidEffectStatePair { value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("arity mismatch: expected {expected} parties, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("no cataloged measurement for ensemble `{0}`")]
    NoCatalogedMeasurement(String),

    #[error("search space too large: {estimated} nodes exceeds bound {bound}")]
    SearchSpaceTooLarge { estimated: u128, bound: u128 },

    #[error("malformed protocol tree: {0}")]
    MalformedTree(String),

    #[error("incomplete measurement: {0}")]
    IncompleteMeasurement(String),

    #[error("numerically inconclusive: {0}")]
    NumericalInconclusive(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, NweError>;
