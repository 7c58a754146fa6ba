use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },

    /// A computation would exceed a configured size limit.
    #[error("resource limit: {what} = {requested} exceeds the cap of {cap}")]
    ResourceLimit { what: &'static str, requested: usize, cap: usize },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed series file {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Checks that a sample grid is finite and strictly increasing.
pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::invalid(format!("non-finite time {bad}")));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("times must be strictly increasing ({} followed by {})", w[0], w[1])));
    }
    Ok(())
}
