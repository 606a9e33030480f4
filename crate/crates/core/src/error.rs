use thiserror::Error;

/// Errors raised by the library. The variants map one-to-one onto the exit
/// codes used by the command line driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated an operation's precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A series does not carry enough coefficients for the request.
    #[error("insufficient precision: {what}; maximum usable value is {max_usable}")]
    Precision { what: String, max_usable: u64 },

    /// An internal consistency check failed (for example a solution space of
    /// the wrong dimension, or a Hecke eigenvalue mismatch).
    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn precision(what: impl Into<String>, max_usable: u64) -> Self {
        Error::Precision {
            what: what.into(),
            max_usable,
        }
    }

    pub(crate) fn assertion(msg: impl Into<String>) -> Self {
        Error::Assertion(msg.into())
    }
}
