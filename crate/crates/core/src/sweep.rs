//! Parameter-grid sweeps and one-parameter bifurcation scans.
//!
//! Each cell is an independent run whose seed is derived from the base seed
//! and the cell index, never from scheduling, so the result is identical for
//! any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::SampEnConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::network::{run, NetworkConfig};
use crate::rng::CounterRng;
use crate::stats::spearman;

/// Side length of the reference two-parameter grids.
pub const REFERENCE_GRID: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Sigma0,
    Mu0,
    DSigma,
    DMu,
    PSigma,
    PMu,
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Sigma0 => "sigma0",
            SweepParam::Mu0 => "mu0",
            SweepParam::DSigma => "d_sigma",
            SweepParam::DMu => "d_mu",
            SweepParam::PSigma => "p_sigma",
            SweepParam::PMu => "p_mu",
            SweepParam::K => "k",
        }
    }

    pub fn apply(self, config: &mut NetworkConfig, value: f64) {
        let slot = match self {
            SweepParam::Sigma0 => &mut config.sigma0,
            SweepParam::Mu0 => &mut config.mu0,
            SweepParam::DSigma => &mut config.d_sigma,
            SweepParam::DMu => &mut config.d_mu,
            SweepParam::PSigma => &mut config.p_sigma,
            SweepParam::PMu => &mut config.p_mu,
            SweepParam::K => &mut config.neuron.k,
        };
        *slot = value;
    }

    pub fn get(self, config: &NetworkConfig) -> f64 {
        match self {
            SweepParam::Sigma0 => config.sigma0,
            SweepParam::Mu0 => config.mu0,
            SweepParam::DSigma => config.d_sigma,
            SweepParam::DMu => config.d_mu,
            SweepParam::PSigma => config.p_sigma,
            SweepParam::PMu => config.p_mu,
            SweepParam::K => config.neuron.k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: SweepParam, lo: f64, hi: f64, count: usize) -> Self {
        Self { name, lo, hi, count }
    }

    /// Linear sampling including both endpoints.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * (i as f64 / last as f64)
                }
            })
            .collect()
    }

    fn validate(&self, which: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("{which}.count must be at least 2")));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Config(format!("{which} needs finite lo < hi")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Seed of sample `s` in cell `c` is derived from `(base seed, c, s)`.
    #[default]
    PerCell,
    /// Every cell reuses the seeds of cell 0.
    Shared,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
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
}

impl SweepSpec {
    pub fn grid(axis1: Axis, axis2: Axis, base: NetworkConfig) -> Self {
        Self {
            axis1,
            axis2: Some(axis2),
            base,
            samples_per_cell: 1,
            seed_policy: SeedPolicy::PerCell,
            sampen: SampEnConfig::default(),
        }
    }

    pub fn scan(axis: Axis, base: NetworkConfig) -> Self {
        Self {
            axis1: axis,
            axis2: None,
            base,
            samples_per_cell: 1,
            seed_policy: SeedPolicy::PerCell,
            sampen: SampEnConfig::default(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.count, self.axis2.map_or(1, |a| a.count))
    }

    pub fn n_cells(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate("axis1")?;
        if let Some(a2) = &self.axis2 {
            a2.validate("axis2")?;
            if a2.name == self.axis1.name {
                return Err(Error::Config("axis1 and axis2 sweep the same parameter".into()));
            }
            if self.base.strict_ranges && (self.axis1.count != REFERENCE_GRID || a2.count != REFERENCE_GRID) {
                return Err(Error::Config(format!(
                    "with strict_ranges a grid must be {REFERENCE_GRID} x {REFERENCE_GRID}, got {} x {}",
                    self.axis1.count, a2.count
                )));
            }
        }
        if self.samples_per_cell < 1 {
            return Err(Error::Config("samples_per_cell must be at least 1".into()));
        }
        self.base.validate()?;
        for cell in 0..self.n_cells() {
            self.cell_config(cell, 0).validate()?;
        }
        Ok(())
    }

    /// Axis values of cell `index` (row-major over `axis1 x axis2`).
    pub fn cell_values(&self, index: usize) -> (f64, Option<f64>) {
        let (_, cols) = self.shape();
        let (i, j) = (index / cols, index % cols);
        let v1 = self.axis1.values()[i];
        (v1, self.axis2.map(|a| a.values()[j]))
    }

    pub fn cell_seed(&self, index: usize, sample: usize) -> u64 {
        let rng = CounterRng::new(self.base.seed);
        let slot = match self.seed_policy {
            SeedPolicy::PerCell => index * self.samples_per_cell + sample,
            SeedPolicy::Shared => sample,
        };
        rng.derive_seed(slot as u64)
    }

    /// Base config with the swept fields and the seed of `(index, sample)`.
    pub fn cell_config(&self, index: usize, sample: usize) -> NetworkConfig {
        let mut cfg = self.base.clone();
        let (v1, v2) = self.cell_values(index);
        self.axis1.name.apply(&mut cfg, v1);
        if let (Some(a2), Some(v2)) = (self.axis2, v2) {
            a2.name.apply(&mut cfg, v2);
        }
        cfg.seed = self.cell_seed(index, sample);
        cfg
    }
}

/// Measures from one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub seed: u64,
    pub gamma_avg: Option<f64>,
    pub sync_error: f64,
    pub solitary_fraction: f64,
    /// Sample entropy of the spatial average; `+inf` when no extended
    /// template matches exist, `None` for a constant series.
    #[serde(with = "opt_entropy")]
    pub sample_entropy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub last_instance: Vec<f64>,
}

/// Mean measures of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub gamma_avg: Option<f64>,
    pub sync_error: f64,
    pub solitary_fraction: f64,
    #[serde(with = "opt_entropy")]
    pub sample_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub value1: f64,
    pub value2: Option<f64>,
    /// A cell is divergent when any of its samples diverged; it then carries
    /// no measures.
    pub diverged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divergence: Option<String>,
    pub summary: Option<CellSummary>,
    pub samples: Vec<SampleMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Gamma,
    SyncError,
    SolitaryFraction,
    SampleEntropy,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Gamma, Measure::SyncError, Measure::SolitaryFraction, Measure::SampleEntropy];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Gamma => "gamma",
            Measure::SyncError => "sync_error",
            Measure::SolitaryFraction => "solitary_fraction",
            Measure::SampleEntropy => "sample_entropy",
        }
    }

    pub fn of(self, s: &CellSummary) -> Option<f64> {
        match self {
            Measure::Gamma => s.gamma_avg,
            Measure::SyncError => Some(s.sync_error),
            Measure::SolitaryFraction => Some(s.solitary_fraction),
            Measure::SampleEntropy => s.sample_entropy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub axis1_values: Vec<f64>,
    pub axis2_values: Option<Vec<f64>>,
    /// Row-major over `axis1 x axis2`.
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1_values.len(), self.axis2_values.as_ref().map_or(1, Vec::len))
    }

    pub fn n_diverged(&self) -> usize {
        self.cells.iter().filter(|c| c.diverged).count()
    }

    pub fn n_valid(&self) -> usize {
        self.cells.len() - self.n_diverged()
    }

    /// Row-major grid of one measure; `None` for divergent or undefined cells.
    pub fn grid(&self, measure: Measure) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.summary.as_ref().and_then(|s| measure.of(s)))
            .collect()
    }
}

/// Evaluates one realization.
pub fn evaluate(config: &NetworkConfig, sampen: &SampEnConfig, keep_last_instance: bool) -> Result<SampleMetrics> {
    let traj = run(config)?;
    let report = MetricsReport::compute_with_entropy(&traj, sampen)?;
    Ok(SampleMetrics {
        seed: config.seed,
        gamma_avg: report.gamma_avg,
        sync_error: report.sync_error,
        solitary_fraction: report.solitary_fraction,
        sample_entropy: report.sample_entropy.map(|se| se.value),
        last_instance: if keep_last_instance { report.last_instance } else { Vec::new() },
    })
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn run_cell(spec: &SweepSpec, index: usize) -> Result<CellResult> {
    let (_, cols) = spec.shape();
    let (value1, value2) = spec.cell_values(index);
    let keep_last = spec.axis2.is_none();
    let mut samples = Vec::with_capacity(spec.samples_per_cell);
    let mut divergence = None;
    for s in 0..spec.samples_per_cell {
        match evaluate(&spec.cell_config(index, s), &spec.sampen, keep_last) {
            Ok(m) => samples.push(m),
            Err(e @ Error::Divergence { .. }) => {
                divergence = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let diverged = divergence.is_some();
    let summary = (!diverged).then(|| {
        let n = samples.len() as f64;
        CellSummary {
            gamma_avg: mean_defined(samples.iter().map(|s| s.gamma_avg)),
            sync_error: samples.iter().map(|s| s.sync_error).sum::<f64>() / n,
            solitary_fraction: samples.iter().map(|s| s.solitary_fraction).sum::<f64>() / n,
            sample_entropy: mean_defined(samples.iter().map(|s| s.sample_entropy)),
        }
    });
    Ok(CellResult {
        index,
        row: index / cols,
        col: index % cols,
        value1,
        value2,
        diverged,
        divergence,
        summary,
        samples: if diverged { Vec::new() } else { samples },
    })
}

/// Runs every cell on `workers` threads (`None` for the rayon default) and
/// reports each finished cell to `on_cell` in completion order.
pub fn run_sweep_with<F>(spec: &SweepSpec, workers: Option<usize>, on_cell: F) -> Result<SweepResult>
where
    F: Fn(&CellResult) + Sync,
{
    spec.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        (0..spec.n_cells())
            .into_par_iter()
            .map(|i| {
                let cell = run_cell(spec, i)?;
                on_cell(&cell);
                Ok(cell)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepResult {
        axis1: spec.axis1,
        axis2: spec.axis2,
        axis1_values: spec.axis1.values(),
        axis2_values: spec.axis2.map(|a| a.values()),
        cells,
    })
}

pub fn run_sweep(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    run_sweep_with(spec, workers, |_| {})
}

/// One-parameter scan keeping the final `x` of every node in every cell.
pub fn scan_bifurcation(spec: &SweepSpec, workers: Option<usize>) -> Result<SweepResult> {
    if spec.axis2.is_some() {
        return Err(Error::Config("a bifurcation scan sweeps exactly one parameter".into()));
    }
    run_sweep(spec, workers)
}

/// Paired measures over non-divergent cells and their rank correlations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCorrelation {
    /// `(gamma, E)` pairs.
    pub e_vs_gamma: Vec<(f64, f64)>,
    /// `(E, SE)` pairs.
    pub se_vs_e: Vec<(f64, f64)>,
    /// `(gamma, SE)` pairs.
    pub se_vs_gamma: Vec<(f64, f64)>,
    pub rho_e_gamma: Option<f64>,
    pub rho_se_e: Option<f64>,
    pub rho_se_gamma: Option<f64>,
}

pub fn correlate_measures(result: &SweepResult) -> MeasureCorrelation {
    let summaries: Vec<&CellSummary> = result.cells.iter().filter_map(|c| c.summary.as_ref()).collect();
    let pairs = |f: fn(&CellSummary) -> Option<(f64, f64)>| -> Vec<(f64, f64)> { summaries.iter().filter_map(|s| f(s)).collect() };
    let e_vs_gamma = pairs(|s| s.gamma_avg.map(|g| (g, s.sync_error)));
    let se_vs_e = pairs(|s| s.sample_entropy.map(|se| (s.sync_error, se)));
    let se_vs_gamma = pairs(|s| Some((s.gamma_avg?, s.sample_entropy?)));
    let rho = |p: &[(f64, f64)]| {
        let (a, b): (Vec<f64>, Vec<f64>) = p.iter().copied().unzip();
        spearman(&a, &b)
    };
    MeasureCorrelation {
        rho_e_gamma: rho(&e_vs_gamma),
        rho_se_e: rho(&se_vs_e),
        rho_se_gamma: rho(&se_vs_gamma),
        e_vs_gamma,
        se_vs_e,
        se_vs_gamma,
    }
}

/// `Option<f64>` entropies with `+inf` written as `"inf"`.
mod opt_entropy {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "crate::entropy::finite_or_inf")] f64);

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(Wrapped).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_base() -> NetworkConfig {
        NetworkConfig {
            n_nodes: 12,
            r_neighbors: 2,
            sigma0: -0.005,
            mu0: 0.0005,
            d_sigma: 0.005,
            d_mu: 0.005,
            p_sigma: 2.0 / 3.0,
            p_mu: 1.0,
            n_total: 600,
            n_transient: 300,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn axis_sampling_is_inclusive() {
        let a = Axis::new(SweepParam::Sigma0, -0.01, 0.01, 5);
        let v = a.values();
        assert_eq!((v[0], v[4]), (-0.01, 0.01));
        for (got, want) in v.iter().zip([-0.01, -0.005, 0.0, 0.005, 0.01]) {
            assert!((got - want).abs() < 1e-17);
        }
        let b = Axis::new(SweepParam::PMu, 0.0, 1.0, 3);
        assert_eq!(b.values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn cell_config_differs_only_in_swept_fields() {
        let spec = SweepSpec::grid(
            Axis::new(SweepParam::Sigma0, -0.01, 0.01, 3),
            Axis::new(SweepParam::K, -1.0, 4.0, 4),
            tiny_base(),
        );
        for idx in 0..spec.n_cells() {
            let mut cfg = spec.cell_config(idx, 0);
            let (v1, v2) = spec.cell_values(idx);
            assert_eq!(cfg.sigma0, v1);
            assert_eq!(cfg.neuron.k, v2.unwrap());
            cfg.sigma0 = spec.base.sigma0;
            cfg.neuron.k = spec.base.neuron.k;
            cfg.seed = spec.base.seed;
            assert_eq!(cfg, spec.base);
        }
        let (v1, v2) = spec.cell_values(5);
        assert_eq!(v1, 0.0);
        assert!((v2.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shared_seeds_make_irrelevant_axes_identical() {
        // With the star layer off, mu0 and d_mu have no effect.
        let base = NetworkConfig {
            p_mu: 0.0,
            ..tiny_base()
        };
        let mut spec = SweepSpec::grid(
            Axis::new(SweepParam::Mu0, -0.001, 0.001, 2),
            Axis::new(SweepParam::DMu, 0.0, 0.1, 2),
            base,
        );
        spec.seed_policy = SeedPolicy::Shared;
        let res = run_sweep(&spec, Some(2)).unwrap();
        let first = res.cells[0].summary;
        assert!(res.cells.iter().all(|c| c.summary == first));
    }

    #[test]
    fn per_cell_seeds_are_distinct() {
        let spec = SweepSpec::scan(Axis::new(SweepParam::Sigma0, -0.01, 0.01, 6), tiny_base());
        let seeds: std::collections::HashSet<u64> = (0..6).map(|i| spec.cell_seed(i, 0)).collect();
        assert_eq!(seeds.len(), 6);
    }

    #[test]
    fn scan_keeps_last_instances() {
        let spec = SweepSpec::scan(Axis::new(SweepParam::Mu0, -0.001, 0.001, 3), tiny_base());
        let res = scan_bifurcation(&spec, Some(1)).unwrap();
        assert_eq!(res.cells.len(), 3);
        for c in &res.cells {
            assert_eq!(c.samples[0].last_instance.len(), 12);
        }
        let grid = SweepSpec::grid(
            Axis::new(SweepParam::Mu0, -0.001, 0.001, 2),
            Axis::new(SweepParam::Sigma0, -0.001, 0.001, 2),
            tiny_base(),
        );
        assert!(scan_bifurcation(&grid, None).is_err());
    }

    #[test]
    fn divergent_cells_are_counted() {
        let spec = SweepSpec::scan(
            Axis::new(SweepParam::K, 0.0, 40.0, 3),
            NetworkConfig {
                neuron: crate::neuron::NeuronParams::with_k(0.0),
                ..tiny_base()
            },
        );
        let res = run_sweep(&spec, None).unwrap();
        assert!(res.cells[2].diverged);
        assert!(res.cells[2].summary.is_none());
        assert_eq!(res.n_diverged() + res.n_valid(), 3);
        assert_eq!(res.grid(Measure::SyncError)[2], None);
    }

    #[test]
    fn samples_are_averaged() {
        let mut spec = SweepSpec::scan(Axis::new(SweepParam::Sigma0, -0.01, 0.0, 2), tiny_base());
        spec.samples_per_cell = 3;
        let res = run_sweep(&spec, None).unwrap();
        for c in &res.cells {
            assert_eq!(c.samples.len(), 3);
            let mean_e = c.samples.iter().map(|s| s.sync_error).sum::<f64>() / 3.0;
            assert!((c.summary.unwrap().sync_error - mean_e).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_correlation_summary() {
        let cell = |i| CellResult {
            index: i,
            row: i,
            col: 0,
            value1: i as f64,
            value2: None,
            diverged: false,
            divergence: None,
            summary: Some(CellSummary {
                gamma_avg: Some(1.0),
                sync_error: 0.0,
                solitary_fraction: 0.0,
                sample_entropy: Some(0.0),
            }),
            samples: Vec::new(),
        };
        let res = SweepResult {
            axis1: Axis::new(SweepParam::Sigma0, 0.0, 1.0, 3),
            axis2: None,
            axis1_values: vec![0.0, 0.5, 1.0],
            axis2_values: None,
            cells: (0..3).map(cell).collect(),
        };
        let c = correlate_measures(&res);
        assert_eq!(c.e_vs_gamma.len(), 3);
        assert_eq!(c.rho_e_gamma, None);
        assert_eq!(c.rho_se_e, None);
    }

    #[test]
    fn validation_rejects_bad_axes() {
        let bad = SweepSpec::scan(Axis::new(SweepParam::Sigma0, 0.01, -0.01, 4), tiny_base());
        assert!(bad.validate().is_err());
        let bad = SweepSpec::scan(Axis::new(SweepParam::Sigma0, -0.01, 0.01, 1), tiny_base());
        assert!(bad.validate().is_err());
        let bad = SweepSpec::scan(Axis::new(SweepParam::PMu, 0.0, 1.5, 3), tiny_base());
        assert!(bad.validate().is_err());
        let strict = SweepSpec::grid(
            Axis::new(SweepParam::Sigma0, -0.01, 0.01, 10),
            Axis::new(SweepParam::Mu0, -0.001, 0.001, 10),
            NetworkConfig {
                strict_ranges: true,
                ..tiny_base()
            },
        );
        assert!(strict.validate().is_err());
    }
}
