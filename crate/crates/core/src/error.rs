use thiserror::Error;

/// Errors surfaced by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Carries the best estimate reached before giving up.
    #[error("accuracy target not reached: {message} (estimate {estimate:e}, error bound {error:e})")]
    Accuracy {
        message: String,
        estimate: f64,
        error: f64,
    },
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("structural error: {0}")]
    Structure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
