use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while loading data or fitting a model.
#[derive(Debug, Error)]
pub enum MelodicError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("structural error: {0}")]
    Structure(String),

    #[error(
        "singular design: predictor column {column} ({name}) is linearly dependent on the preceding columns"
    )]
    SingularDesign { column: usize, name: String },

    #[error("response {name} has only one observed class")]
    SingleClassResponse { name: String },

    #[error("invalid dimension assignment: {0}")]
    InvalidAssignment(String),

    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing column {column}")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: row {row}, column {column}: {message}")]
    Cell {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = MelodicError> = std::result::Result<T, E>;

impl MelodicError {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        MelodicError::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
