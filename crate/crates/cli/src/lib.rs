//! Scenario runner: presets, config ingestion, sweeps and CSV/JSON output.

pub mod check;
pub mod config;
pub mod presets;
pub mod run;

use std::path::PathBuf;

/// Env var naming the default output directory.
pub const OUTPUT_DIR_VAR: &str = "QFR_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("simulation failed: {0}")]
    Core(#[from] qfr_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Output directory: explicit, else from the config, else `$QFR_OUTPUT_DIR/<name>`,
/// else `qfr-out/<name>`.
pub fn output_dir(explicit: Option<PathBuf>, cfg: &config::ScenarioConfig) -> PathBuf {
    explicit.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| {
        let root = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("qfr-out"));
        root.join(&cfg.name)
    })
}
