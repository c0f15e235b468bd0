use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing {what} file: {}", path.display())]
    MissingFile { what: &'static str, path: PathBuf },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dataset {dataset}: graph {graph} is disconnected")]
    Disconnected { dataset: String, graph: usize },

    #[error("invalid coding tree: {0}")]
    InvalidTree(String),

    #[error("invalid move: {0}")]
    InvalidMove(String),

    #[error("tree is not canonicalized: {0}")]
    NotCanonical(String),

    #[error("feature vocabulary: {0}")]
    Vocabulary(String),

    #[error("feature vectors come from different alphabets ({0} vs {1})")]
    AlphabetMismatch(u64, u64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
