use thiserror::Error;

/// Errors raised by the spectral computations and their drivers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request would exceed a configured computation cap.
    #[error("{what} needs {required}, above the configured cap of {cap}{hint}")]
    ResourceCap {
        what: String,
        required: String,
        cap: String,
        hint: String,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
