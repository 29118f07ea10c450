use std::fmt;

/// Errors shared by every module in the crate.
#[derive(Debug)]
pub enum Error {
    /// A grid or profile was constructed with inconsistent parameters.
    InvalidArgument(String),
    /// An operation received a field on the wrong side (physical vs frequency).
    SideMismatch { expected: &'static str, found: &'static str },
    /// A computation produced or encountered a non-finite value.
    NonFinite(String),
    /// The grid cannot resolve the requested frequency content.
    UnderResolved(String),
    /// I/O failure while reading or writing a field container or report.
    Io(std::io::Error),
    /// A serialized container had a malformed or unexpected header.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SideMismatch { expected, found } => {
                write!(f, "field side mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::UnderResolved(msg) => write!(f, "under-resolved grid: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
