use std::io;
use std::path::PathBuf;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed or inconsistent row of a measurement log.
    #[error("line {line}: {message}")]
    Log { line: u64, message: String },

    #[error("measurement log is empty")]
    EmptyLog,

    /// A configuration value failed parsing or validation; `path` is the
    /// dotted key path, empty for document-level problems.
    #[error("{}{message}", if path.is_empty() { String::new() } else { format!("{path}: ") })]
    Config { path: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] peres_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
