use std::io;

use thiserror::Error;

/// Errors raised by the surrogate toolkit and the decomposition solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("generator failed validation: {0}")]
    ValidationFailure(String),

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("singular value decomposition failed: {0}")]
    SvdFailure(String),

    #[error("no support satisfies the residual bound")]
    Infeasible,

    #[error("unknown generator kind `{0}`")]
    UnknownKind(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}

pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
