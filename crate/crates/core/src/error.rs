use thiserror::Error;

/// Errors shared across the library.
///
/// `Capacity` is used wherever an operation is exact-but-bounded (sieve
/// tables, exhaustive residue enumeration): callers asked for something the
/// configured budget cannot deliver, and silently degrading to sampling is
/// never acceptable, so the call fails instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded in {what}: needed {needed}, budget {budget}")]
    Capacity {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
