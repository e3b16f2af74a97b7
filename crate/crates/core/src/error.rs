use std::path::PathBuf;

/// Errors produced by transforms, learning and file handling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("inconsistent structure: {0}")]
    Structure(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite value produced by tape node {node} ({op})")]
    NonFinite { node: usize, op: &'static str },

    #[error("training diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by numeric or validation failures rather than
    /// malformed requests.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Diverged { .. } | Error::Undefined(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
