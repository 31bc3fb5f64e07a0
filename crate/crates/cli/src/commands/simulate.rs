//! One network configuration: metrics, series and the five-panel figure set.

use std::collections::BTreeMap;

use chialvo_core::{recurrence_matrix, run, spatial_average, MetricsReport, Regime, TrajectoryBlock};
use serde::Serialize;

use super::{manifest, Common};
use crate::config::{self, SimulateConfig};
use crate::error::CliResult;
use crate::output::{Cell, OutputDir, RunManifest, Table};
use crate::plot::{self, regime_color, Labels};

#[derive(Serialize)]
struct Report<'a> {
    seed: u64,
    n_nodes: usize,
    n_recorded_steps: usize,
    regime_counts: BTreeMap<&'static str, usize>,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Coherent => "coherent",
        Regime::Intermediate => "intermediate",
        Regime::Solitary => "solitary",
        Regime::OutOfRange => "out_of_range",
        Regime::Undefined => "undefined",
    }
}

pub fn run_command(args: &Common, emit_trajectory: bool) -> CliResult<RunManifest> {
    let mut cfg: SimulateConfig = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.network.seed = seed;
    }
    cfg.emit_trajectory |= emit_trajectory;
    cfg.network.validate()?;
    let snapshot = config::to_toml(&cfg)?;

    let out = OutputDir::create(
        &args.out,
        args.format,
        manifest("simulate", &args.config, &cfg, Some(cfg.network.seed), args.threads, cfg.network.range_flags())?,
    )?;
    out.write_bytes("config.toml", snapshot.as_bytes())?;

    // y and phi histories only feed the phase portrait unless requested.
    let mut run_cfg = cfg.network.clone();
    run_cfg.record_full_state |= cfg.images;
    let traj = run(&run_cfg)?;
    let report = MetricsReport::compute_with_entropy(&traj, &cfg.sampen)?;
    let n = traj.n_nodes();
    let first_iteration = cfg.network.n_transient + 1;

    let mut counts = BTreeMap::new();
    for &l in &report.labels {
        *counts.entry(regime_name(l)).or_insert(0) += 1;
    }
    out.write_json(
        "metrics.json",
        &Report {
            seed: cfg.network.seed,
            n_nodes: n,
            n_recorded_steps: traj.n_steps(),
            regime_counts: counts,
            metrics: &report,
        },
    )?;

    let avg = spatial_average(&traj);
    let mut t = Table::new(["iteration", "mean_x"]);
    for (i, v) in avg.iter().enumerate() {
        t.push(vec![(first_iteration + i).into(), (*v).into()]);
    }
    out.write_table("spatial_average", &t)?;

    let mut t = Table::new(["node", "x"]);
    for (m, x) in report.last_instance.iter().enumerate() {
        t.push(vec![m.into(), (*x).into()]);
    }
    out.write_table("last_instance", &t)?;

    let mut t = Table::new(["node", "gamma", "regime"]);
    for (m, (g, l)) in report.gamma_per_node.iter().zip(&report.labels).enumerate() {
        t.push(vec![m.into(), (*g).into(), regime_name(*l).into()]);
    }
    out.write_table("gamma", &t)?;

    let rec = recurrence_matrix(traj.final_states(), cfg.recurrence);
    let mut t = Table::new(std::iter::once("node".to_string()).chain((0..n).map(|j| j.to_string())));
    for i in 0..n {
        let mut row = vec![Cell::from(i)];
        row.extend(rec[i * n..(i + 1) * n].iter().map(|&v| Cell::Num(v)));
        t.push(row);
    }
    out.write_table("recurrence", &t)?;

    if cfg.emit_trajectory {
        write_trajectory(&out, &traj, first_iteration, cfg.network.record_full_state)?;
    }

    if cfg.images {
        draw_panels(&out, &cfg, &traj, &report, &rec, first_iteration);
    }
    out.finish()
}

fn write_trajectory(out: &OutputDir, traj: &TrajectoryBlock, first_iteration: usize, full: bool) -> CliResult<()> {
    let n = traj.n_nodes();
    write_history(out, "trajectory_x", "x", &(0..n).map(|m| traj.x_row(m)).collect::<Vec<_>>(), first_iteration)?;
    if full {
        let ys: Option<Vec<_>> = (0..n).map(|m| traj.y_row(m)).collect();
        let phis: Option<Vec<_>> = (0..n).map(|m| traj.phi_row(m)).collect();
        if let (Some(ys), Some(phis)) = (ys, phis) {
            write_history(out, "trajectory_y", "y", &ys, first_iteration)?;
            write_history(out, "trajectory_phi", "phi", &phis, first_iteration)?;
        }
    }
    Ok(())
}

/// One row per iteration, one column per node.
fn write_history(out: &OutputDir, stem: &str, var: &str, rows: &[&[f64]], first_iteration: usize) -> CliResult<()> {
    let mut t = Table::new(std::iter::once("iteration".to_string()).chain((0..rows.len()).map(|m| format!("{var}_{m}"))));
    for s in 0..rows.first().map_or(0, |r| r.len()) {
        let mut r = vec![Cell::from(first_iteration + s)];
        r.extend(rows.iter().map(|row| Cell::Num(row[s])));
        t.push(r);
    }
    out.write_table(stem, &t).map(|_| ())
}

fn draw_panels(out: &OutputDir, cfg: &SimulateConfig, traj: &TrajectoryBlock, report: &MetricsReport, rec: &[f64], first_iteration: usize) {
    let n = traj.n_nodes();
    let steps = traj.n_steps();
    let window = cfg.raster_steps.clamp(1, steps);
    let start = steps - window;
    let colors: Vec<_> = report.labels.iter().map(|&l| regime_color(l)).collect();

    out.write_image("phase_portrait.png", |p| {
        let mut pts = Vec::with_capacity(n * window);
        for (m, &color) in colors.iter().enumerate() {
            let (xs, ys) = (traj.x_row(m), traj.y_row(m).ok_or("y history missing")?);
            pts.extend((start..steps).map(|s| (xs[s], ys[s], color)));
        }
        plot::scatter(p, &Labels { title: "Phase portrait", x: "x", y: "y" }, &pts, 1)
    });

    let base = report.baseline;
    let gamma_title = format!("Cross-correlation with node {base}");
    out.write_image("gamma.png", |p| {
        let pts: Vec<_> = report
            .gamma_per_node
            .iter()
            .enumerate()
            .filter_map(|(m, g)| g.map(|g| (m as f64, g, colors[m])))
            .collect();
        plot::scatter(p, &Labels { title: &gamma_title, x: "node m", y: "gamma" }, &pts, 3)
    });

    out.write_image("spatiotemporal.png", |p| {
        let iters: Vec<f64> = (start..steps).map(|s| (first_iteration + s) as f64).collect();
        let nodes: Vec<f64> = (0..n).map(|m| m as f64).collect();
        let mut vals = Vec::with_capacity(n * window);
        for m in 0..n {
            vals.extend(traj.x_row(m)[start..].iter().map(|&v| Some(v)));
        }
        plot::heatmap(p, &Labels { title: "Spatiotemporal pattern of x", x: "iteration", y: "node m" }, &iters, &nodes, &vals)
    });

    out.write_image("last_instance.png", |p| {
        let pts: Vec<_> = report.last_instance.iter().enumerate().map(|(m, &x)| (m as f64, x, colors[m])).collect();
        plot::scatter(p, &Labels { title: "Last instance", x: "node m", y: "x" }, &pts, 3)
    });

    out.write_image("recurrence.png", |p| {
        let nodes: Vec<f64> = (0..n).map(|m| m as f64).collect();
        let vals: Vec<_> = rec.iter().map(|&v| Some(v)).collect();
        plot::heatmap(p, &Labels { title: "Recurrence (final-state distances)", x: "node j", y: "node i" }, &nodes, &nodes, &vals)
    });
}
