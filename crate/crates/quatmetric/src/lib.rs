//! Command-line front end for `quatmetric-core`: builtin algebras, algebra
//! and tau-table file formats, JSON/CSV reports.

pub mod catalog;
pub mod cli;
pub mod formats;
pub mod report;

use thiserror::Error;

pub use formats::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Core(#[from] quatmetric_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
