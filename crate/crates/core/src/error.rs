use thiserror::Error;

/// Crate-wide error type. Variants map to the failure surfaces: wiring
/// mistakes, bad runtime inputs, bad configuration, scenario files, trace
/// queries, and plain I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A node, level, or channel was used against the wrong target.
    #[error("structural: {0}")]
    Structural(String),

    /// A runtime input (sensor frame, candidate list) was malformed.
    #[error("input: {0}")]
    Input(String),

    /// A configuration value is out of range or inconsistent.
    #[error("config: {0}")]
    Config(String),

    /// A scenario file failed to load; `field` points at the offender.
    #[error("scenario {field}: {reason}")]
    Load { field: String, reason: String },

    /// A trace query could not be answered.
    #[error("query: {0}")]
    Query(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn load(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Load {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn query(msg: impl Into<String>) -> Self {
        Error::Query(msg.into())
    }
}
