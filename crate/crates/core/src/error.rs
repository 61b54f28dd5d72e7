//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A series or matrix was inverted at a point where it vanishes.
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    /// The working precision is too small to certify a result.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    /// The computation needs roots or eigenvalues outside the session field.
    #[error("field extension required: {0}")]
    FieldExtensionRequired(String),
    /// Operands come from different fields or have incompatible shapes.
    #[error("incompatible operands: {0}")]
    Incompatible(String),
    /// The input violates a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// A Higgs germ has no pure-slope decomposition.
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    /// A germ is admissible but fails the goodness reduction.
    #[error("not good: {0}")]
    NotGood(String),
    /// A global vanishing condition fails.
    #[error("condition {condition} fails: {detail}")]
    ConditionFailed { condition: String, detail: String },
    /// Malformed external input.
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) | Error::FieldExtensionRequired(_) => 3,
            Error::ConditionFailed { .. } | Error::NotAdmissible(_) | Error::NotGood(_) => 1,
            _ => 2,
        }
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
