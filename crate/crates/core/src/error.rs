use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),

    #[error("input too short: need more than {required} samples, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArg { arg: &'static str, reason: String },

    #[error("zero-energy input: {0}")]
    ZeroEnergy(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{}:{row}: {reason}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArg {
            arg,
            reason: reason.into(),
        }
    }
}
