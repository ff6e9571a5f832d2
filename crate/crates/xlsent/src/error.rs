//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or length mismatch between operands.
    #[error("size mismatch: {0}")]
    Size(String),

    /// Non-finite values or operations outside their numeric domain
    /// (e.g. cosine of a zero vector).
    #[error("numeric domain error: {0}")]
    Numeric(String),

    /// A linear system too ill-conditioned to solve.
    #[error("degenerate system: {0}")]
    Degenerate(String),

    /// Caller passed an argument violating an operation's contract.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Malformed input data tied to a specific line.
    #[error("format error at line {line}: {msg}")]
    FormatAt { line: usize, msg: String },

    /// Malformed input data without a line to point at.
    #[error("format error: {0}")]
    Format(String),

    /// Training could not proceed (e.g. every instance out of vocabulary).
    #[error("training error: {0}")]
    Training(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format_at(line: usize, msg: impl Into<String>) -> Self {
        Error::FormatAt {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors that indicate bad inputs rather than a failure
    /// while doing the work. The CLI maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::Format(_) | Error::FormatAt { .. } | Error::Size(_)
        )
    }
}
