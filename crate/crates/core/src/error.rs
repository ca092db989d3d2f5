use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's preconditions.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed input bytes; `offset` points at the offending byte.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// The file is recognizable but uses a feature this crate does not read.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Problem size exceeds a solver's supported range.
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    /// Input is degenerate for the requested computation (e.g. all-zero image
    /// where a scale must be fitted).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A numerical procedure failed an internal consistency check.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }
}
