use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("site out of range: {0}")]
    Range(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("unsupported observable form: {0}")]
    UnsupportedForm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
