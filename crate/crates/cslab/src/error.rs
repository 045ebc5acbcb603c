use std::path::PathBuf;

/// Errors produced by grid construction, configuration parsing, file I/O and
/// the snapshot format. Solver blow-up is deliberately *not* an error: runs
/// abort and carry a flag in their report instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter `{name}` out of range: {message}")]
    Parameter { name: String, message: String },

    #[error("grid/domain mismatch: {0}")]
    Grid(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parameter(name: &str, message: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
