use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the benchmark pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty corpus after filtering")]
    EmptyCorpus,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("character {ch:?} is not in the vocabulary")]
    OutOfVocabulary { ch: char },

    #[error("insufficient spectrum: need at least 2 entries, got {0}")]
    InsufficientSpectrum(usize),

    #[error("incompatible preprocessing: {0}")]
    IncompatiblePreprocessing(String),

    #[error("degenerate baselines: lower and upper bound are both {0}")]
    DegenerateBaselines(f64),

    #[error("undefined metric: {0}")]
    Undefined(String),

    #[error("malformed {what}: {detail}")]
    Malformed { what: String, detail: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(what: impl Into<String>, detail: impl ToString) -> Self {
        Error::Malformed {
            what: what.into(),
            detail: detail.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
