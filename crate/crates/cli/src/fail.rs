use std::fmt;
use std::path::Path;

use pseudoarc_core::Error;

/// Why a command stopped, and the exit code that goes with it.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Parse(String),
    /// A library error, classified by [`Failure::code`].
    Lib(Error),
    /// A check ran and the object did not pass.
    Rejected(String),
    Internal(String),
}

impl Failure {
    pub fn io(path: &Path, e: std::io::Error) -> Failure {
        Failure::Usage(format!("{}: {e}", path.display()))
    }

    /// 1 usage or parse, 2 resource, 3 precondition.
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Parse(_) => 1,
            Failure::Lib(Error::Parse(_)) => 1,
            Failure::Lib(Error::Size { .. } | Error::Depth(_) | Error::Inconclusive { .. }) => 2,
            Failure::Lib(_) | Failure::Rejected(_) | Failure::Internal(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Rejected(m) => write!(f, "check failed: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}
