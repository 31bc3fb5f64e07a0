//! Config files: TOML documents deserialized strictly, with the offending
//! field path in every error.

use std::path::Path;

use chialvo_core::{
    Axis, NetworkConfig, NeuronParams, NeuronState, RecurrenceMode, SampEnConfig, SeedPolicy, SweepSpec,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn yes() -> bool {
    true
}

/// `simulate` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub network: NetworkConfig,
    #[serde(default)]
    pub sampen: SampEnConfig,
    #[serde(default)]
    pub recurrence: RecurrenceMode,
    /// Steps shown in the spatiotemporal raster (the last ones recorded).
    #[serde(default = "default_raster_steps")]
    pub raster_steps: usize,
    #[serde(default)]
    pub emit_trajectory: bool,
    #[serde(default = "yes")]
    pub images: bool,
}

fn default_raster_steps() -> usize {
    500
}

/// `sweep` input. One axis gives a bifurcation scan, two a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    pub base: NetworkConfig,
    #[serde(default = "one")]
    pub samples_per_cell: usize,
    #[serde(default)]
    pub seed_policy: SeedPolicy,
    #[serde(default)]
    pub sampen: SampEnConfig,
    #[serde(default = "yes")]
    pub images: bool,
}

fn one() -> usize {
    1
}

impl SweepConfig {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            axis1: self.axis1,
            axis2: self.axis2,
            base: self.base.clone(),
            samples_per_cell: self.samples_per_cell,
            seed_policy: self.seed_policy,
            sampen: self.sampen,
        }
    }
}

/// `single-neuron` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleNeuronConfig {
    #[serde(default)]
    pub neuron: NeuronParams,
    #[serde(default = "default_initial")]
    pub initial: [f64; 3],
    #[serde(default = "default_steps")]
    pub n_transient: usize,
    #[serde(default = "default_steps")]
    pub n_sample: usize,
    #[serde(default)]
    pub sampen: SampEnConfig,
    #[serde(default = "yes")]
    pub images: bool,
}

fn default_initial() -> [f64; 3] {
    let s = NeuronState::default();
    [s.x, s.y, s.phi]
}

fn default_steps() -> usize {
    10_000
}

impl SingleNeuronConfig {
    pub fn initial_state(&self) -> NeuronState {
        NeuronState::new(self.initial[0], self.initial[1], self.initial[2])
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.message().trim().to_string();
        if path == "." {
            CliError::Config(msg)
        } else {
            CliError::Config(format!("at `{path}`: {msg}"))
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn to_toml<T: Serialize>(value: &T) -> CliResult<String> {
    toml::to_string(value).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
}
