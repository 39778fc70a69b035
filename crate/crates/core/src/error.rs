use thiserror::Error;

/// Failures surfaced by the library.
///
/// `Domain` covers invalid inputs (malformed spectra, out-of-range parameters,
/// inconsistent dimensions). `Resource` covers requests that exceed an
/// enumeration or memory budget.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
