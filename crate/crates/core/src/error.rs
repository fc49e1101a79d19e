use thiserror::Error;

use crate::scalar::ScalarError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),
    #[error("invalid slot: {0}")]
    InvalidSlot(String),
    #[error("insufficient jet order: need {need}, have {have}")]
    InsufficientOrder { need: usize, have: usize },
    #[error("evaluation singularity: {0}")]
    Singular(String),
    #[error("not weakly generic: {0}")]
    GenericityFailure(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

impl From<ScalarError> for Error {
    fn from(e: ScalarError) -> Self {
        match e {
            ScalarError::DivisionByZero => Error::Singular("division by zero".into()),
            ScalarError::Parse(s) => Error::Parse(s),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
