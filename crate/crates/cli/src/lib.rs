//! Configuration-driven front end for the `multidisk` solver: TOML run
//! configs, the `solve`/`dort`/`validate` pipelines, and the CSV and JSON
//! files they write.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] multidisk::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 2 for non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotConverged { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
