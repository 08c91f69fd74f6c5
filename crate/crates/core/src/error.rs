use thiserror::Error;

/// Errors produced by the library. Every fallible operation returns one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Invalid input: bad vertex, non-path where a path is needed, failed precondition on shape.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two relations or graphs that must line up do not.
    #[error("mismatch: {0}")]
    Mismatch(String),
    /// A construction hypothesis does not hold for the supplied data.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A construction would exceed the configured vertex budget.
    #[error("size limit exceeded at level {level}: needs {} vertices, limit is {limit}", vertex_count(*.vertices))]
    Size { level: usize, vertices: u64, limit: u64 },
    /// A tower is too shallow for the requested operation.
    #[error("insufficient depth: {0}")]
    Depth(String),
    /// A bounded search ran out of budget without a verdict.
    #[error("inconclusive up to bound {bound}: {what}")]
    Inconclusive { bound: usize, what: String },
    /// A construction produced something that failed its own verification.
    #[error("internal error: {0}")]
    Internal(String),
    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

fn vertex_count(v: u64) -> String {
    match v {
        u64::MAX => "more than 2^64".into(),
        v => v.to_string(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn internal<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Internal(msg.into()))
}
