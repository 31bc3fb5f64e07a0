use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{RunManifest, TableFormat};

pub mod simulate;
pub mod single_neuron;
pub mod sweep;

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Common {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub format: TableFormat,
}

pub(crate) fn manifest<T: Serialize>(
    command: &str,
    source: &Path,
    config: &T,
    seed: Option<u64>,
    threads: Option<usize>,
    warnings: Vec<String>,
) -> CliResult<RunManifest> {
    Ok(RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.into(),
        config_source: source.display().to_string(),
        config: serde_json::to_value(config).map_err(|e| CliError::Other(format!("json: {e}")))?,
        seed,
        threads,
        warnings,
        artifacts: Vec::new(),
        duration_secs: 0.0,
        complete: false,
    })
}
