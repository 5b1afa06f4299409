use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Core(#[from] kltransfer_core::Error),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    /// Process exit code: 3 for generation failures, 2 for everything else
    /// (bad configs, unreadable or malformed inputs, violated preconditions).
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Generation(_)
            | HarnessError::Core(kltransfer_core::Error::Generation(_)) => 3,
            _ => 2,
        }
    }
}

pub fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}
