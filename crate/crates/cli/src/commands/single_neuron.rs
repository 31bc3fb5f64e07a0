//! The isolated neuron: orbit, sample entropy and Lyapunov spectrum.

use chialvo_core::{lyapunov_spectrum, sample_entropy, ChialvoMap, SampleEntropy};
use serde::Serialize;

use super::{manifest, Common};
use crate::config::{self, SingleNeuronConfig};
use crate::error::{CliError, CliResult};
use crate::output::{OutputDir, RunManifest, Table};
use crate::plot::{self, Labels};

#[derive(Serialize)]
struct Report {
    k: f64,
    n_transient: usize,
    n_sample: usize,
    lambda_max: f64,
    lyapunov_spectrum: [f64; 3],
    sample_entropy: SampleEntropy,
    x_min: f64,
    x_max: f64,
}

/// Steps shown in the time-series image.
const SERIES_WINDOW: usize = 500;

pub fn run_command(args: &Common) -> CliResult<RunManifest> {
    let cfg: SingleNeuronConfig = config::load(&args.config)?;
    cfg.neuron.validate()?;
    let snapshot = config::to_toml(&cfg)?;
    let out = OutputDir::create(
        &args.out,
        args.format,
        manifest("single-neuron", &args.config, &cfg, None, args.threads, cfg.neuron.range_flags())?,
    )?;
    if args.seed.is_some() {
        out.warn("--seed ignored: the single-neuron map is deterministic".into());
    }
    out.write_bytes("config.toml", snapshot.as_bytes())?;

    let map = ChialvoMap::new(cfg.neuron);
    let orbit = map.orbit(cfg.initial_state(), cfg.n_transient + cfg.n_sample)?;
    let sampled = &orbit[cfg.n_transient..];
    let xs: Vec<f64> = sampled.iter().map(|s| s.x).collect();
    let se = sample_entropy(&xs, &cfg.sampen)?;
    let spectrum = lyapunov_spectrum(&map, cfg.initial_state(), cfg.n_transient, cfg.n_sample).map_err(|e| match e {
        chialvo_core::Error::TooShort { len, min } => CliError::Config(format!("n_sample = {len} is below the minimum {min}")),
        other => other.into(),
    })?;

    out.write_json(
        "report.json",
        &Report {
            k: cfg.neuron.k,
            n_transient: cfg.n_transient,
            n_sample: cfg.n_sample,
            lambda_max: spectrum.max(),
            lyapunov_spectrum: spectrum.exponents,
            sample_entropy: se,
            x_min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            x_max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
    )?;

    let mut t = Table::new(["iteration", "x", "y", "phi"]);
    for (i, s) in sampled.iter().enumerate() {
        t.push(vec![(cfg.n_transient + i + 1).into(), s.x.into(), s.y.into(), s.phi.into()]);
    }
    out.write_table("time_series", &t)?;

    if cfg.images {
        out.write_image("phase_portrait.png", |p| {
            let pts: Vec<_> = sampled.iter().map(|s| (s.x, s.y, plotters::style::BLUE)).collect();
            plot::scatter(p, &Labels { title: "Phase portrait", x: "x", y: "y" }, &pts, 1)
        });
        out.write_image("time_series.png", |p| {
            let start = sampled.len().saturating_sub(SERIES_WINDOW);
            let pts: Vec<_> = sampled[start..]
                .iter()
                .enumerate()
                .map(|(i, s)| ((cfg.n_transient + start + i + 1) as f64, s.x))
                .collect();
            plot::lines(p, &Labels { title: "Time series", x: "iteration", y: "x" }, &[(pts, plotters::style::BLUE)])
        });
    }
    out.finish()
}
