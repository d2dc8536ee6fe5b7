//! Config-driven front end of `subdiff`: forward and inverse solves,
//! roundtrip recovery experiments and a built-in self-test.
//!
//! Exit statuses: 0 success, 1 configuration or I/O failure, 2 numerical
//! failure, 3 unsolvable inverse instance, 4 self-test failure.

use std::path::PathBuf;

pub mod config;
pub mod run;
pub mod selftest;

pub use config::{parse_config, parse_str, Mode, RunConfig};
pub use run::{run, RunOutcome};

/// Overrides the output directory of every run.
pub const OUTPUT_DIR_ENV: &str = "SUBDIFF_OUTPUT_DIR";

/// Output directory used when neither the environment nor the config names one.
pub const DEFAULT_OUTPUT_DIR: &str = "subdiff-output";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] subdiff_core::Error),
    #[error("inverse instance is not solvable: {0}")]
    Unsolvable(String),
    #[error("self-test failed: {0} check(s)")]
    Selftest(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use subdiff_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(E::Io(_) | E::Parse(_) | E::Usage(_) | E::Shape { .. }) => 1,
            CliError::Core(_) => 2,
            CliError::Unsolvable(_) => 3,
            CliError::Selftest(_) => 4,
        }
    }
}

/// `$SUBDIFF_OUTPUT_DIR`, else the config's `output_dir`, else
/// [`DEFAULT_OUTPUT_DIR`].
pub fn output_dir(config_dir: Option<&std::path::Path>) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config_dir.map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    }
}
