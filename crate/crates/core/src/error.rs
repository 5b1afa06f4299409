use thiserror::Error;

/// Errors raised by the tabular bandit routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("policy class is empty")]
    EmptyClass,

    #[error("preference dataset is empty")]
    EmptyDataset,

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("policy tag cannot be resolved to a table: {0}")]
    UnresolvedTag(String),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("instance generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims_mismatch(expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::DimensionMismatch {
        expected: format!("{}x{}", expected.0, expected.1),
        found: format!("{}x{}", found.0, found.1),
    }
}
