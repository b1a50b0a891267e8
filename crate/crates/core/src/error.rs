use thiserror::Error;

/// Errors raised by configuration validation and operator preconditions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("representation mismatch: {0}")]
    Representation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} too large for exhaustive enumeration ({size} > {limit})")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn input_err(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
