use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The call is well-formed but inconsistent with the geometry or material.
    #[error("usage error: {0}")]
    Usage(String),
    /// A scene invariant is violated. The message names the invariant.
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn scene(msg: impl Into<String>) -> Self {
        Error::Scene(msg.into())
    }
}
