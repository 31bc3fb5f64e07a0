//! Synchronization and pattern measures over a post-transient trajectory.

use serde::{Deserialize, Serialize};

use crate::entropy::{sample_entropy, SampEnConfig, SampleEntropy};
use crate::error::{Error, Result};
use crate::network::{TrajectoryBlock, BASELINE};
use crate::neuron::NeuronState;

/// Series with variance below this are treated as constant.
pub const MIN_VARIANCE: f64 = 1e-30;

/// Regime thresholds on the correlation with the baseline node.
pub const SOLITARY_LOWER: f64 = -0.38;
pub const SOLITARY_UPPER: f64 = -0.15;
pub const COHERENT_LOWER: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Coherent,
    Intermediate,
    Solitary,
    /// Correlation below the solitary band.
    OutOfRange,
    /// Constant series; correlation undefined.
    Undefined,
}

impl Regime {
    pub fn of(gamma: Option<f64>) -> Self {
        match gamma {
            None => Regime::Undefined,
            Some(g) if g < SOLITARY_LOWER => Regime::OutOfRange,
            Some(g) if g <= SOLITARY_UPPER => Regime::Solitary,
            Some(g) if g < COHERENT_LOWER => Regime::Intermediate,
            Some(_) => Regime::Coherent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: Vec<Regime>,
    pub n_solitary: usize,
    /// `N_s / N`.
    pub solitary_fraction: f64,
}

impl Classification {
    pub fn count(&self, regime: Regime) -> usize {
        self.labels.iter().filter(|&&r| r == regime).count()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Correlation of every node's `x` series with the `baseline` node's.
/// Entries are `None` for constant series.
pub fn cross_correlation(traj: &TrajectoryBlock, baseline: usize) -> Result<Vec<Option<f64>>> {
    if baseline >= traj.n_nodes() {
        return Err(Error::Index {
            index: baseline,
            expected: "baseline node",
            n_nodes: traj.n_nodes(),
        });
    }
    if traj.n_steps() < 2 {
        return Err(Error::TooShort {
            len: traj.n_steps(),
            min: 2,
        });
    }
    let centered: Vec<Vec<f64>> = traj
        .x_rows()
        .map(|row| {
            let m = mean(row);
            row.iter().map(|v| v - m).collect()
        })
        .collect();
    let variance: Vec<f64> = centered.iter().map(|c| mean_of_products(c, c)).collect();

    let base = &centered[baseline];
    let base_var = variance[baseline];
    if base_var < MIN_VARIANCE {
        // Nothing correlates with a constant reference.
        return Ok(vec![None; traj.n_nodes()]);
    }
    Ok(centered
        .iter()
        .zip(&variance)
        .enumerate()
        .map(|(i, (c, &var))| {
            if i == baseline {
                Some(1.0)
            } else if var < MIN_VARIANCE {
                None
            } else {
                let g = mean_of_products(base, c) / (base_var * var).sqrt();
                Some(g.clamp(-1.0, 1.0))
            }
        })
        .collect())
}

fn mean_of_products(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Mean correlation over all nodes except the baseline; undefined entries
/// are dropped from both sum and divisor.
pub fn gamma_average(gamma: &[Option<f64>], baseline: usize) -> Option<f64> {
    let defined: Vec<f64> = gamma
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != baseline)
        .filter_map(|(_, g)| *g)
        .collect();
    (!defined.is_empty()).then(|| mean(&defined))
}

/// `E = 1/(N-1) sum_{m != b} < |x_b - x_m| >`.
pub fn sync_error(traj: &TrajectoryBlock, baseline: usize) -> Result<f64> {
    if baseline >= traj.n_nodes() {
        return Err(Error::Index {
            index: baseline,
            expected: "baseline node",
            n_nodes: traj.n_nodes(),
        });
    }
    if traj.n_nodes() < 2 {
        return Err(Error::Config("synchronization error needs at least two nodes".into()));
    }
    let base = traj.x_row(baseline);
    let total: f64 = (0..traj.n_nodes())
        .filter(|&m| m != baseline)
        .map(|m| {
            let row = traj.x_row(m);
            base.iter().zip(row).map(|(a, b)| (a - b).abs()).sum::<f64>() / row.len() as f64
        })
        .sum();
    Ok(total / (traj.n_nodes() - 1) as f64)
}

/// Regime labels; the baseline is always coherent.
pub fn classify(gamma: &[Option<f64>], baseline: usize) -> Classification {
    let labels: Vec<Regime> = gamma
        .iter()
        .enumerate()
        .map(|(i, &g)| if i == baseline { Regime::Coherent } else { Regime::of(g) })
        .collect();
    let n_solitary = labels.iter().filter(|&&r| r == Regime::Solitary).count();
    Classification {
        solitary_fraction: n_solitary as f64 / labels.len().max(1) as f64,
        n_solitary,
        labels,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceMode {
    #[default]
    XOnly,
    FullState,
}

/// Pairwise distances between final node states, row-major `N x N`.
pub fn recurrence_matrix(final_states: &[NeuronState], mode: RecurrenceMode) -> Vec<f64> {
    let n = final_states.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&final_states[i], &final_states[j]);
            let d = match mode {
                RecurrenceMode::XOnly => (a.x - b.x).abs(),
                RecurrenceMode::FullState => {
                    let (dx, dy, dp) = (a.x - b.x, a.y - b.y, a.phi - b.phi);
                    (dx * dx + dy * dy + dp * dp).sqrt()
                }
            };
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    out
}

/// Mean `x` over all nodes at each recorded step.
pub fn spatial_average(traj: &TrajectoryBlock) -> Vec<f64> {
    let mut acc = vec![0.0; traj.n_steps()];
    for row in traj.x_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = traj.n_nodes() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// All measures for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub baseline: usize,
    pub gamma_per_node: Vec<Option<f64>>,
    pub gamma_avg: Option<f64>,
    pub sync_error: f64,
    pub solitary_fraction: f64,
    pub n_solitary: usize,
    pub labels: Vec<Regime>,
    pub sample_entropy: Option<SampleEntropy>,
    pub last_instance: Vec<f64>,
}

impl MetricsReport {
    /// Correlation, synchronization error and regime labels against the
    /// default baseline. Sample entropy is left empty.
    pub fn compute(traj: &TrajectoryBlock) -> Result<Self> {
        Self::compute_with_baseline(traj, BASELINE)
    }

    /// As [`MetricsReport::compute`], plus the sample entropy of the spatial
    /// average. A constant average leaves the entropy empty.
    pub fn compute_with_entropy(traj: &TrajectoryBlock, sampen: &SampEnConfig) -> Result<Self> {
        let mut report = Self::compute(traj)?;
        report.sample_entropy = match sample_entropy(&spatial_average(traj), sampen) {
            Ok(se) => Some(se),
            Err(Error::DegenerateSeries(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(report)
    }

    pub fn compute_with_baseline(traj: &TrajectoryBlock, baseline: usize) -> Result<Self> {
        let gamma = cross_correlation(traj, baseline)?;
        let classes = classify(&gamma, baseline);
        Ok(Self {
            baseline,
            gamma_avg: gamma_average(&gamma, baseline),
            sync_error: sync_error(traj, baseline)?,
            solitary_fraction: classes.solitary_fraction,
            n_solitary: classes.n_solitary,
            labels: classes.labels,
            gamma_per_node: gamma,
            sample_entropy: None,
            last_instance: traj.last_instance(),
        })
    }
}
