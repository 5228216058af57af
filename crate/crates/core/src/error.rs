use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension in {context}: expected {expected}, found {found}")]
    InvalidDimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady state is not unique: {0}")]
    NonUniqueSteadyState(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("state violates density-matrix invariants: {0}")]
    InvalidState(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("truncation not converged at {axis} = {value}: {detail}")]
    TruncationFailed {
        axis: &'static str,
        value: f64,
        detail: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
