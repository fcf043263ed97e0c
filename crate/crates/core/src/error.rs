//! Crate error type. Variants map onto the CLI exit codes: parameter bound
//! violations, malformed input, and internal assertions (theory violations)
//! are kept distinct.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size bound exceeded: {0}")]
    SizeBound(String),
    #[error("invalid subfield: {0}")]
    InvalidSubfield(String),
    #[error("level or space mismatch: {0}")]
    LevelMismatch(String),
    #[error("representation dimension bound exceeded: {0}")]
    DimensionBound(String),
    #[error("enumeration threshold exceeded: {0}")]
    ThresholdExceeded(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("internal assertion failed (theory violation): {0}")]
    Internal(String),
}

impl Error {
    /// CLI exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPrime(_)
            | Error::SizeBound(_)
            | Error::DimensionBound(_)
            | Error::ThresholdExceeded(_)
            | Error::Unsupported(_) => 3,
            Error::InvalidSubfield(_) | Error::LevelMismatch(_) | Error::Malformed(_) => 4,
            Error::Internal(_) => 5,
        }
    }
}
