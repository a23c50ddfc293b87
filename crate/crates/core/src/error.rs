use thiserror::Error;

/// Errors raised by the precoding library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Dimensions or settings are inconsistent with each other.
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical routine failed (singular factorization, bracket not found).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
