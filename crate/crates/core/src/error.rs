use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The variants fall in two groups. [`Error::Parse`], [`Error::Validation`],
/// [`Error::NotStronglyConnected`], [`Error::Unsupported`] and
/// [`Error::InvalidArgument`] reject bad input before any computation;
/// [`Error::Numerical`] and [`Error::Integrity`] mean a computed quantity
/// failed one of its defining identities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("not strongly connected")]
    NotStronglyConnected,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure in {context} (residual {residual:e})")]
    Numerical { context: String, residual: f64 },

    #[error("integrity check failed: {check} (residual {residual:e})")]
    Integrity { check: String, residual: f64 },

    #[error("walk exceeded the step cap of {cap} steps")]
    Runaway { cap: u64 },
}

impl Error {
    pub(crate) fn integrity(check: impl Into<String>, residual: f64) -> Self {
        Error::Integrity {
            check: check.into(),
            residual,
        }
    }

    /// True for failures of computed identities, as opposed to bad input.
    pub fn is_integrity(&self) -> bool {
        matches!(self, Error::Integrity { .. } | Error::Numerical { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
