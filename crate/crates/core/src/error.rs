use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("scene parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid scene: {0}")]
    Validation(String),

    #[error("invalid volume grid: {0}")]
    VolumeGrid(String),

    #[error("invalid PFM: {0}")]
    Pfm(String),

    #[error("invalid path-record dump: {0}")]
    RecordDump(String),

    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fixed-point solve diverged: {0}")]
    Divergence(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
