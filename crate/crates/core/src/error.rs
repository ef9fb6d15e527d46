use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is invalid or inconsistent (wrong layer shapes,
    /// unsupported agent count, malformed config file, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An API contract was violated by the caller (stale activation cache,
    /// stepping a finished episode, illegal message tag for the variant, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Numerical failure: a non-finite value where a finite one is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A checkpoint does not match the configuration it is evaluated under.
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Config(e.to_string())
    }
}
