//! Batch front-end for `qsdyn-core`: scenario files in, CSV/JSON/summary
//! artifacts and a cross-scenario report out.

pub mod config;
pub mod element;
pub mod ini;
pub mod pipeline;
pub mod report;

use std::fmt;
use std::path::PathBuf;

pub use config::{Outcome, Pipeline, ScenarioConfig};
pub use pipeline::{run_config, run_paths, write_artifacts, ScenarioResult};
pub use report::{emit_report, Report};

/// A config problem, located by line (when known) and `section.key`.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.field.is_empty()) {
            (Some(l), false) => write!(f, "line {l}: {}: {}", self.field, self.message),
            (Some(l), true) => write!(f, "line {l}: {}", self.message),
            (None, _) => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {err}")]
    Config { path: String, err: ConfigError },
    #[error("no run artifacts in {0}")]
    MissingArtifact(String),
    #[error("scenario {scenario}: {err}")]
    Core { scenario: String, err: qsdyn_core::Error },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::MissingArtifact(_) => EXIT_CONFIG,
            CliError::Core { .. } | CliError::Io(_) => EXIT_INTERNAL,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Overrides every scenario's own seed.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Multiplies Monte-Carlo sample counts.
    pub samples_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: None, out_dir: PathBuf::from("out"), samples_scale: 1.0 }
    }
}
