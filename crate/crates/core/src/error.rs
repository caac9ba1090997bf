use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("all probabilities are zero")]
    ZeroMass,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration too large: K^n = {k}^{n} = {count} exceeds cap {cap}")]
    EnumerationTooLarge {
        k: usize,
        n: usize,
        count: String,
        cap: u64,
    },
    #[error("support mismatch: {0}")]
    SupportMismatch(String),
    #[error("not absolutely continuous: p has mass {p_mass} at atom {atom} where q has none")]
    NotAbsolutelyContinuous { atom: f64, p_mass: f64 },
    #[error("invalid kernel output: {0}")]
    InvalidKernelOutput(String),
    #[error("no exact evaluator: {0}")]
    NoExactEvaluator(String),
    #[error("no models")]
    NoModels,
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
