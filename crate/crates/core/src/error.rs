use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A state left the finite region or crossed the divergence guard.
    #[error("divergence at step {step}, node {node}: {detail}")]
    Divergence {
        step: usize,
        node: usize,
        detail: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("node index {index} is not a valid {expected} (network has {n_nodes} nodes)")]
    Index {
        index: usize,
        expected: &'static str,
        n_nodes: usize,
    },

    #[error("series too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
}

pub type Result<T> = std::result::Result<T, Error>;
