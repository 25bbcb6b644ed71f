use std::io;
use std::path::PathBuf;

use hdsign::HdSignError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Open { path: PathBuf, source: io::Error },

    #[error("row {row}, column {col}: {reason}")]
    Cell { row: usize, col: usize, reason: String },

    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },

    #[error("input contains no data rows")]
    Empty,

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] HdSignError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
