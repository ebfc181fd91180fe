use thiserror::Error;

/// Errors produced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its contract.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// A function was asked for a value outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative procedure ran out of budget before meeting its tolerance.
    #[error("{what} did not converge (best estimate {estimate:e}, error {error:e})")]
    Convergence {
        what: String,
        estimate: f64,
        error: f64,
    },

    /// A numerical consistency check failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Runtime configuration that cannot be honoured, e.g. a cache that is too short.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Prefix the failing quantity onto numerical errors so callers can tell
    /// which matrix element or integral broke.
    pub fn context(self, what: &str) -> Self {
        match self {
            Error::Convergence {
                what: inner,
                estimate,
                error,
            } => Error::Convergence {
                what: format!("{what}: {inner}"),
                estimate,
                error,
            },
            Error::Numerical(msg) => Error::Numerical(format!("{what}: {msg}")),
            Error::Domain(msg) => Error::Domain(format!("{what}: {msg}")),
            other => other,
        }
    }

    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::Config(_) | Error::Io { .. } => 2,
            Error::Domain(_) | Error::Convergence { .. } | Error::Numerical(_) => 3,
        }
    }
}

pub(crate) fn ensure_finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be > 0, got {value}")))
    }
}
