use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A state failed a structural invariant (norm, hermiticity, positivity).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested regime is deliberately not modeled.
    #[error("not supported: {0}")]
    NotSupported(String),

    /// Sample data carry no spread.
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Two independent numerical routes disagreed beyond tolerance.
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn invalid_state(msg: impl Into<String>) -> Error {
    Error::InvalidState(msg.into())
}
