//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("generator tables differ")]
    TableMismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("series did not terminate on {0}")]
    Divergence(String),
    #[error("not acyclic on slice {0}")]
    NotAcyclic(String),
    #[error("cap exhausted: {0}")]
    CapExhausted(String),
    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
