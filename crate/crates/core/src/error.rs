use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("view '{view}' has {found} rows but the manifest lists {expected} samples")]
    RowCountMismatch {
        view: String,
        expected: usize,
        found: usize,
    },

    #[error("width mismatch in {context}: expected {expected}, found {found}")]
    WidthMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in '{view}' at row {row}, column {col}")]
    NonFinite { view: String, row: usize, col: usize },

    #[error("sample '{sample}' has unknown label id {label}")]
    UnknownLabel { sample: String, label: usize },

    #[error("unknown view '{0}'")]
    UnknownView(String),

    #[error("empty sample subset")]
    EmptySubset,

    #[error("class {class} has {count} samples, fewer than the {k} folds requested")]
    ClassTooSmall { class: usize, count: usize, k: usize },

    #[error("fewer than 2 classes present")]
    FewerThanTwoClasses,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        context: String,
        left: usize,
        right: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("brute-force dual oracle supports at most {max} samples, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("non-finite kernel value between samples {i} and {j}")]
    NonFiniteKernel { i: usize, j: usize },

    #[error("voter '{0}' required by the fusion strategy is missing")]
    VoterMissing(String),

    #[error("dataset '{dataset}', fold {fold}, row '{row}', classifier '{classifier}': {source}")]
    Task {
        dataset: String,
        fold: usize,
        row: String,
        classifier: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
