use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a structural invariant (dimensions, lengths).
    #[error("structural error: {0}")]
    Structure(String),

    /// A statistic is undefined on the given data (e.g. no exceedances).
    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub fn undefined(msg: impl Into<String>) -> Self {
        Error::Undefined(msg.into())
    }
}
