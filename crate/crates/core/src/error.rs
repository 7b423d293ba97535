//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit-code classes: `Parse` and
/// `InvalidParameter` are configuration mistakes, `Precondition` is a valid
/// request outside an operation's stated domain (e.g. `n` above a solver
/// guard), and `Io` is an environment failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A spec string or input file could not be parsed.
    Parse(String),
    /// A parameter value violates a constructor's constraints.
    InvalidParameter(String),
    /// An operation precondition does not hold for these inputs.
    Precondition(String),
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
