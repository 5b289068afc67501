use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Argument outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested value outside the range covered by the data.
    #[error("out of range: {0}")]
    Range(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A computed object violates a bound it must satisfy.
    #[error("validation failed: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    /// True for failures caused by the input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::InvalidGraph(_) | Error::Domain(_) | Error::Range(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
