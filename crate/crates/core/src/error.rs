use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A series could not be evaluated to the requested accuracy.
    #[error("precision: {0}")]
    Precision(String),
    /// A numerical evaluation hit a pole or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Required cached integrals or graph sums are absent.
    #[error("missing cache entries: {}", .0.join(", "))]
    MissingCache(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
