//! Command-line front end for the SMA truss simulator: presets, TOML
//! configs with typed overrides, CSV/metrics artifacts, and the
//! convergence-bound report.

use std::fmt;
use std::path::Path;

use sma_truss::sim::{run_scenario, Scenario, ScenarioResult};

pub mod config;
pub mod output;
pub mod report;

pub use config::Config;

/// Exit code for configuration and validation failures.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a numerical blow-up during integration.
pub const EXIT_BLOWUP: i32 = 3;
/// Exit code when verify-bounds finds the error outside the box.
pub const EXIT_OUTSIDE_BOX: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Configuration, validation, or file-format problem.
    Config(String),
    /// Numerical blow-up propagated from the engine.
    BlowUp(sma_truss::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn config(msg: String) -> Self {
        CliError::Config(msg)
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::BlowUp(_) => EXIT_BLOWUP,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::BlowUp(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<sma_truss::Error> for CliError {
    fn from(e: sma_truss::Error) -> Self {
        match e {
            sma_truss::Error::BlowUp { .. } => CliError::BlowUp(e),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Run a scenario and write the three artifacts into `dir`.
pub fn run_to_dir(dir: &Path, sc: &Scenario) -> Result<ScenarioResult, CliError> {
    let result = run_scenario(sc)?;
    output::write_artifacts(dir, sc, &result)?;
    Ok(result)
}
