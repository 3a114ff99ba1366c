//! Experiment runner for fire-retaining games.

pub mod config;
pub mod experiment;
pub mod render;
pub mod sweep;

use std::path::PathBuf;

pub use config::{parse_config, Analysis, ExperimentConfig, FireSpec, GraphSource, StrategySpec};
pub use experiment::{load_config, run_experiment, write_bundle, Bundle, RunOptions};
pub use render::{render_snapshot, Format};

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" line {line}")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CliError {
    #[error("config{}: {msg}", at_line(*line))]
    Config { line: usize, msg: String },
    #[error("{context}: {source}")]
    Core {
        context: &'static str,
        #[source]
        source: retain_core::Error,
    },
    #[error("{}: {msg}", path.display())]
    Io { path: PathBuf, msg: String },
    #[error("transport certification failed: {0}")]
    Certification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            msg: err.to_string(),
        }
    }
}

/// Tags core errors with the module they came from.
pub(crate) trait Context<T> {
    fn context(self, context: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for retain_core::Result<T> {
    fn context(self, context: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context, source })
    }
}
