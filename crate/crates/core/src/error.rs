use thiserror::Error;

/// Errors raised by the library layer.
///
/// `Validation` covers every out-of-range input; `Budget` covers work or
/// memory guards. The CLI maps these to exit codes 2 and 3.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Validation { name: &'static str, reason: String },

    #[error("work budget exceeded: {0}")]
    Budget(String),

    #[error("fixed-point iteration did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NotConverged { residual: f64, iterations: usize },

    #[error("schedule too short: word of length {len} exceeds coverage {coverage}")]
    ScheduleTooShort { len: usize, coverage: usize },

    #[error("insufficient data: {0}")]
    Insufficient(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            name,
            reason: reason.into(),
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation { .. } => "validation",
            Error::Budget(_) => "budget",
            Error::NotConverged { .. } => "not_converged",
            Error::ScheduleTooShort { .. } => "schedule_too_short",
            Error::Insufficient(_) => "insufficient",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
