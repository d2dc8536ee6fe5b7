use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs have inconsistent truncation levels or lengths.
    #[error("shape mismatch: {what} (expected {expected}, got {got})")]
    Shape { what: &'static str, expected: usize, got: usize },

    /// The requested accuracy could not be reached; `estimate` is the achieved
    /// error bound (absolute unless stated otherwise in `context`).
    #[error("accuracy not achieved in {context}: achieved error estimate {estimate:e}")]
    Accuracy { context: String, estimate: f64 },

    /// The result does not fit the floating-point range.
    #[error("overflow in {0}")]
    Overflow(String),

    /// A required optional component is absent.
    #[error("missing component: {0}")]
    Missing(&'static str),

    /// The operation was invoked in a state where it is not defined.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
