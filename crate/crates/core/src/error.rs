use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Domain errors name the module and the offending parameter so that CLI
/// messages can point at the exact configuration value.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: invalid `{param}`: {reason}")]
    Domain {
        module: &'static str,
        param: &'static str,
        reason: String,
    },
    #[error("{module}: frame error: {reason}")]
    Frame { module: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(module: &'static str, param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            module,
            param,
            reason: reason.into(),
        }
    }

    pub(crate) fn frame(module: &'static str, reason: impl Into<String>) -> Self {
        Error::Frame {
            module,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
