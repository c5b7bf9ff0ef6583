use std::path::PathBuf;

use munidss_core::ValidationReport;
use thiserror::Error;

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported format_version {0}")]
    UnsupportedVersion(u32),

    #[error("project is invalid: {0}")]
    Invalid(ValidationReport),

    #[error("{0}")]
    BadRequest(String),

    #[error("project `{0}` not found")]
    NotFound(String),

    #[error("stale revision {supplied}, current revision is {current}")]
    Conflict { current: u64, supplied: u64 },

    #[error(transparent)]
    Engine(#[from] munidss_core::Error),
}

impl GatewayError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GatewayError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for GatewayError {
    fn from(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column, message) = (err.line(), err.column(), err.to_string());
        match err.classify() {
            Category::Data => GatewayError::Schema {
                line,
                column,
                message,
            },
            _ => GatewayError::Parse {
                line,
                column,
                message,
            },
        }
    }
}
