use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pitch request: {0}")]
    InvalidPitch(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("undefined SNR: {0}")]
    UndefinedSnr(&'static str),

    #[error("invalid transform configuration: {0}")]
    InvalidTransform(String),

    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("stale forward cache: {0}")]
    StaleCache(&'static str),

    #[error("episode is done; call reset before stepping again")]
    EpisodeDone,

    #[error("empty episode")]
    EmptyEpisode,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown preset {name:?}; available presets: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("unknown note name {0:?}")]
    UnknownNote(String),

    #[error("malformed parameter file: {0}")]
    Format(String),

    #[error("ragged metric histories: {0}")]
    Ragged(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    IoPlain(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
