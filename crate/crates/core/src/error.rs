use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid response map: {0}")]
    InvalidMap(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("unknown colormap `{name}` (available: {available})")]
    UnknownColormap { name: String, available: String },

    #[error("render error: {0}")]
    Render(String),

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
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
}

pub type Result<T> = std::result::Result<T, Error>;
