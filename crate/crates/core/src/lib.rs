//! Memristive Chialvo neurons on a ring-star network.
//!
//! The single-neuron map and its Lyapunov exponent, the stochastically
//! coupled network simulator, synchronization measures, sample entropy and
//! parameter sweeps.

pub mod entropy;
pub mod error;
pub mod lyapunov;
pub mod metrics;
pub mod network;
pub mod neuron;
pub mod rng;
pub mod stats;
pub mod sweep;

pub use entropy::{sample_entropy, SampEnConfig, SampleEntropy, Tolerance};
pub use error::{Error, Result};
pub use lyapunov::{lyapunov_spectrum, max_lyapunov, LyapunovSpectrum};
pub use metrics::{
    classify, cross_correlation, gamma_average, recurrence_matrix, spatial_average, sync_error, Classification,
    MetricsReport, RecurrenceMode, Regime,
};
pub use network::{
    run, LinkMode, NetworkConfig, RingDifference, StarDifference, TrajectoryBlock, BASELINE, CENTRAL,
};
pub use neuron::{jacobian, memconductance, step, ChialvoMap, Map3, NeuronParams, NeuronState};
pub use rng::CounterRng;
pub use stats::spearman;
pub use sweep::{
    correlate_measures, run_sweep, run_sweep_with, scan_bifurcation, Axis, CellResult, CellSummary, Measure,
    MeasureCorrelation, SeedPolicy, SweepParam, SweepResult, SweepSpec,
};
