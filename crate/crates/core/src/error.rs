use thiserror::Error;

/// Errors raised by the library. The CLI maps [`Error::Size`] to exit code 3
/// and input/usage problems to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive enumeration would exceed its configured cap.
    #[error("size cap exceeded: {what} needs {needed} but the cap is {cap}")]
    Size {
        what: &'static str,
        needed: f64,
        cap: f64,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The final-partition search found no admissible size.
    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn size(what: &'static str, needed: f64, cap: f64) -> Self {
        Error::Size { what, needed, cap }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn is_size(&self) -> bool {
        matches!(self, Error::Size { .. })
    }
}
