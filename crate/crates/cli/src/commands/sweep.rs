//! Parameter grids and bifurcation scans.

use std::fs::OpenOptions;
use std::io::{BufWriter, Write};
use std::sync::Mutex;

use chialvo_core::{correlate_measures, run_sweep_with, CellResult, Measure, SweepResult};
use serde::Serialize;

use super::{manifest, Common};
use crate::config::{self, SweepConfig};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputDir, RunManifest, Table};
use crate::plot::{self, Labels};

/// Cells are appended here as they finish, so an interrupted sweep keeps its
/// progress; on completion the file is rewritten in cell order.
const CELLS: &str = "cells.jsonl";

/// File stem, points and the `(x, y)` column names.
type ScatterSpec<'a> = (&'a str, &'a [(f64, f64)], (&'a str, &'a str));

#[derive(Serialize)]
struct Summary {
    shape: (usize, usize),
    n_cells: usize,
    n_valid: usize,
    n_diverged: usize,
    rho_e_gamma: Option<f64>,
    rho_se_e: Option<f64>,
    rho_se_gamma: Option<f64>,
}

fn measure_label(m: Measure) -> &'static str {
    match m {
        Measure::Gamma => "gamma",
        Measure::SyncError => "E",
        Measure::SolitaryFraction => "Ns/N",
        Measure::SampleEntropy => "SE",
    }
}

fn json_line(cell: &CellResult) -> CliResult<Vec<u8>> {
    let mut line = serde_json::to_vec(cell).map_err(|e| CliError::Other(format!("json: {e}")))?;
    line.push(b'\n');
    Ok(line)
}

pub fn run_command(args: &Common) -> CliResult<RunManifest> {
    let mut cfg: SweepConfig = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base.seed = seed;
    }
    let spec = cfg.spec();
    spec.validate()?;
    let snapshot = config::to_toml(&cfg)?;
    let out = OutputDir::create(
        &args.out,
        args.format,
        manifest("sweep", &args.config, &cfg, Some(cfg.base.seed), args.threads, cfg.base.range_flags())?,
    )?;
    out.write_bytes("config.toml", snapshot.as_bytes())?;

    out.write_bytes(CELLS, b"")?;
    out.flush_manifest()?;
    let cells_path = out.path(CELLS);
    let file = OpenOptions::new().append(true).open(&cells_path).map_err(CliError::io(&cells_path))?;
    let sink = Mutex::new(BufWriter::new(file));
    let stream_error = Mutex::new(None::<CliError>);
    let result = run_sweep_with(&spec, args.threads, |cell| {
        let written = json_line(cell).and_then(|line| {
            let mut w = sink.lock().unwrap();
            w.write_all(&line).and_then(|_| w.flush()).map_err(CliError::io(&cells_path))
        });
        if let Err(e) = written {
            stream_error.lock().unwrap().get_or_insert(e);
        }
    })?;
    drop(sink);
    if let Some(e) = stream_error.into_inner().unwrap() {
        return Err(e);
    }

    let mut ordered = Vec::new();
    for c in &result.cells {
        ordered.extend(json_line(c)?);
    }
    out.write_bytes(CELLS, &ordered)?;
    if result.n_diverged() > 0 {
        out.warn(format!("{} of {} cells diverged", result.n_diverged(), result.cells.len()));
    }

    let corr = correlate_measures(&result);
    out.write_json(
        "summary.json",
        &Summary {
            shape: result.shape(),
            n_cells: result.cells.len(),
            n_valid: result.n_valid(),
            n_diverged: result.n_diverged(),
            rho_e_gamma: corr.rho_e_gamma,
            rho_se_e: corr.rho_se_e,
            rho_se_gamma: corr.rho_se_gamma,
        },
    )?;

    let pairs: [ScatterSpec; 3] = [
        ("scatter_e_vs_gamma", &corr.e_vs_gamma, ("gamma", "sync_error")),
        ("scatter_se_vs_e", &corr.se_vs_e, ("sync_error", "sample_entropy")),
        ("scatter_se_vs_gamma", &corr.se_vs_gamma, ("gamma", "sample_entropy")),
    ];
    for (stem, pts, (a, b)) in pairs {
        let mut t = Table::new([a, b]);
        for &(u, v) in pts {
            t.push(vec![u.into(), v.into()]);
        }
        out.write_table(stem, &t)?;
        if cfg.images {
            let title = format!("{b} vs {a}");
            out.write_image(&format!("{stem}.png"), |p| {
                let pts: Vec<_> = pts.iter().map(|&(u, v)| (u, v, plotters::style::BLUE)).collect();
                plot::scatter(p, &Labels { title: &title, x: a, y: b }, &pts, 3)
            });
        }
    }

    match &result.axis2_values {
        Some(_) => write_grids(&out, &result, cfg.images)?,
        None => write_scan(&out, &result, cfg.images)?,
    }
    out.finish()
}

fn write_grids(out: &OutputDir, result: &SweepResult, images: bool) -> CliResult<()> {
    let axis2 = result.axis2.expect("grid sweep");
    let values2 = result.axis2_values.as_deref().unwrap_or_default();
    let corner = format!("{}\\{}", result.axis1.name.name(), axis2.name.name());
    for m in Measure::ALL {
        let grid = result.grid(m);
        out.write_table(&format!("grid_{}", m.name()), &Table::grid(&corner, &result.axis1_values, values2, &grid))?;
        if images {
            let title = measure_label(m);
            out.write_image(&format!("heatmap_{}.png", m.name()), |p| {
                let labels = Labels {
                    title,
                    x: axis2.name.name(),
                    y: result.axis1.name.name(),
                };
                plot::heatmap(p, &labels, values2, &result.axis1_values, &grid)
            });
        }
    }
    Ok(())
}

fn write_scan(out: &OutputDir, result: &SweepResult, images: bool) -> CliResult<()> {
    let name = result.axis1.name.name();
    let mut t = Table::new([name, "diverged", "gamma", "sync_error", "solitary_fraction", "sample_entropy"]);
    for c in &result.cells {
        let s = c.summary;
        let get = |m: Measure| Cell::Opt(s.as_ref().and_then(|s| m.of(s)));
        t.push(vec![
            c.value1.into(),
            Cell::Int(u64::from(c.diverged)),
            get(Measure::Gamma),
            get(Measure::SyncError),
            get(Measure::SolitaryFraction),
            get(Measure::SampleEntropy),
        ]);
    }
    out.write_table("scan", &t)?;

    // One row per (parameter value, node) pair from the first sample.
    let mut t = Table::new([name, "node", "x"]);
    let mut pts = Vec::new();
    for c in result.cells.iter().filter(|c| !c.diverged) {
        if let Some(s) = c.samples.first() {
            for (m, &x) in s.last_instance.iter().enumerate() {
                t.push(vec![c.value1.into(), m.into(), x.into()]);
                pts.push((c.value1, x, plotters::style::BLACK));
            }
        }
    }
    out.write_table("bifurcation", &t)?;

    if images {
        out.write_image("bifurcation.png", |p| plot::scatter(p, &Labels { title: "Last instances", x: name, y: "x" }, &pts, 1));
        for m in Measure::ALL {
            let series: Vec<(f64, f64)> = result
                .cells
                .iter()
                .filter_map(|c| Some((c.value1, m.of(c.summary.as_ref()?)?)))
                .filter(|p| p.1.is_finite())
                .collect();
            out.write_image(&format!("scan_{}.png", m.name()), |p| {
                plot::lines(p, &Labels { title: measure_label(m), x: name, y: measure_label(m) }, &[(series, plotters::style::BLUE)])
            });
        }
    }
    Ok(())
}
