use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, IdsError>;

#[derive(Debug, Error)]
pub enum IdsError {
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("unknown attack label(s): {}", .0.join(", "))]
    UnknownLabel(Vec<String>),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{artifact}: format version {found} is not supported (expected {expected})")]
    VersionMismatch {
        artifact: String,
        found: u32,
        expected: u32,
    },

    #[error("stale activation cache: {0}")]
    StaleCache(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("io error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl IdsError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            IdsError::MissingFile(path)
        } else {
            IdsError::Io { path, source }
        }
    }

    /// Process exit code for the command-line front end:
    /// 1 internal failure, 2 usage/config error, 3 data validation error.
    pub fn exit_code(&self) -> i32 {
        match self {
            IdsError::Config(_) | IdsError::MissingFile(_) | IdsError::VersionMismatch { .. } => 2,
            IdsError::Parse { .. } | IdsError::UnknownLabel(_) | IdsError::InvalidInput(_) | IdsError::Shape(_) => 3,
            IdsError::StaleCache(_) | IdsError::Io { .. } | IdsError::Json(_) => 1,
        }
    }
}
