use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rule table error: {0}")]
    Rules(String),

    #[error("did not converge: {0}")]
    NoConvergence(String),

    #[error("problem too large: {0}")]
    SizeGuard(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) => 3,
            Error::SizeGuard(_) => 4,
            _ => 2,
        }
    }
}
