//! Ring-star network of flux-coupled Chialvo neurons with heterogeneous,
//! time-varying couplings.
//!
//! Nodes are indexed from 0. Node [`CENTRAL`] is the hub, linked to every
//! other node through the star layer. Nodes `1..N` are peripherals; they form
//! a cyclic lattice in which each peripheral is linked to `R` neighbours on
//! either side. The hub never takes part in the ring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{check_state, flux, local_activation, recovery, NeuronParams, NeuronState, DEFAULT_DIVERGENCE_GUARD};
use crate::rng::{CounterRng, Purpose};

/// Index of the hub node.
pub const CENTRAL: usize = 0;
/// Index of the first peripheral, the reference node for correlation metrics.
pub const BASELINE: usize = 1;

/// How link activity is drawn each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    /// One Bernoulli draw per layer per step switches the whole layer.
    #[default]
    Layer,
    /// One Bernoulli draw per link per step.
    PerLink,
}

/// Orientation of the difference inside the ring sum of a peripheral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingDifference {
    /// `sigma_i (x_m - x_i)`: same orientation as the peripheral star term.
    #[default]
    SelfMinusNeighbor,
    /// `sigma_i (x_i - x_m)`: conventional diffusive form.
    NeighborMinusSelf,
}

/// Orientation of the star term of a peripheral. The hub always uses
/// `sum_i mu_i (x_i - x_hub)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarDifference {
    /// `mu_m (x_m - x_hub)`.
    #[default]
    SelfMinusHub,
    /// `mu_m (x_hub - x_m)`: conventional diffusive form.
    HubMinusSelf,
}

impl RingDifference {
    fn sign(self) -> f64 {
        match self {
            RingDifference::NeighborMinusSelf => 1.0,
            RingDifference::SelfMinusNeighbor => -1.0,
        }
    }
}

impl StarDifference {
    fn sign(self) -> f64 {
        match self {
            StarDifference::SelfMinusHub => 1.0,
            StarDifference::HubMinusSelf => -1.0,
        }
    }
}

fn default_noise_lo() -> f64 {
    -0.001
}
fn default_noise_hi() -> f64 {
    0.001
}
fn default_n_total() -> usize {
    20_000
}
fn default_n_transient() -> usize {
    10_000
}
fn default_guard() -> f64 {
    DEFAULT_DIVERGENCE_GUARD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Total node count `N`, hub included.
    pub n_nodes: usize,
    /// Ring neighbours per side `R`.
    pub r_neighbors: usize,
    /// Mean ring coupling.
    pub sigma0: f64,
    /// Mean star coupling.
    pub mu0: f64,
    /// Ring noise intensity.
    pub d_sigma: f64,
    /// Star noise intensity.
    pub d_mu: f64,
    /// Probability that the ring layer is active at a step.
    pub p_sigma: f64,
    /// Probability that the star layer is active at a step.
    pub p_mu: f64,
    #[serde(default = "default_noise_lo")]
    pub noise_lo: f64,
    #[serde(default = "default_noise_hi")]
    pub noise_hi: f64,
    #[serde(default = "default_n_total")]
    pub n_total: usize,
    #[serde(default = "default_n_transient")]
    pub n_transient: usize,
    pub seed: u64,
    #[serde(default)]
    pub neuron: NeuronParams,
    #[serde(default)]
    pub link_mode: LinkMode,
    #[serde(default)]
    pub ring_difference: RingDifference,
    #[serde(default)]
    pub star_difference: StarDifference,
    /// Keep `y` and `phi` histories as well as `x`.
    #[serde(default)]
    pub record_full_state: bool,
    #[serde(default = "default_guard")]
    pub divergence_guard: f64,
    /// Treat the reference parameter ranges as hard limits.
    #[serde(default)]
    pub strict_ranges: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            r_neighbors: 2,
            sigma0: 0.0,
            mu0: 0.0,
            d_sigma: 0.0,
            d_mu: 0.0,
            p_sigma: 1.0,
            p_mu: 1.0,
            noise_lo: default_noise_lo(),
            noise_hi: default_noise_hi(),
            n_total: default_n_total(),
            n_transient: default_n_transient(),
            seed: 0,
            neuron: NeuronParams::default(),
            link_mode: LinkMode::Layer,
            ring_difference: RingDifference::default(),
            star_difference: StarDifference::default(),
            record_full_state: false,
            divergence_guard: DEFAULT_DIVERGENCE_GUARD,
            strict_ranges: false,
        }
    }
}

impl NetworkConfig {
    pub const SIGMA0_RANGE: (f64, f64) = (-0.01, 0.01);
    pub const MU0_RANGE: (f64, f64) = (-0.001, 0.001);
    pub const NOISE_INTENSITY_RANGE: (f64, f64) = (0.0, 0.1);

    pub fn n_peripherals(&self) -> usize {
        self.n_nodes - 1
    }

    pub fn n_recorded(&self) -> usize {
        self.n_total - self.n_transient
    }

    /// Hard invariants, plus the reference ranges when `strict_ranges` is set.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        if self.n_nodes < 3 {
            return cfg(format!("n_nodes must be at least 3, got {}", self.n_nodes));
        }
        if self.r_neighbors < 1 || 2 * self.r_neighbors > self.n_nodes - 2 {
            return cfg(format!(
                "r_neighbors must satisfy 1 <= R and 2R <= n_nodes - 2, got R = {} with n_nodes = {}",
                self.r_neighbors, self.n_nodes
            ));
        }
        for (name, v) in [
            ("sigma0", self.sigma0),
            ("mu0", self.mu0),
            ("d_sigma", self.d_sigma),
            ("d_mu", self.d_mu),
            ("noise_lo", self.noise_lo),
            ("noise_hi", self.noise_hi),
        ] {
            if !v.is_finite() {
                return cfg(format!("{name} must be finite"));
            }
        }
        for (name, p) in [("p_sigma", self.p_sigma), ("p_mu", self.p_mu)] {
            if !(0.0..=1.0).contains(&p) {
                return cfg(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.noise_lo > self.noise_hi {
            return cfg(format!("noise_lo ({}) exceeds noise_hi ({})", self.noise_lo, self.noise_hi));
        }
        if self.n_transient >= self.n_total {
            return cfg(format!(
                "n_transient ({}) must be below n_total ({})",
                self.n_transient, self.n_total
            ));
        }
        if self.divergence_guard.is_nan() || self.divergence_guard <= 0.0 {
            return cfg("divergence_guard must be positive".into());
        }
        self.neuron.validate()?;
        if self.strict_ranges {
            if let Some(flag) = self.range_flags().into_iter().next() {
                return cfg(format!("outside reference range: {flag}"));
            }
        }
        Ok(())
    }

    /// Parameters outside the reference ranges.
    pub fn range_flags(&self) -> Vec<String> {
        let mut flags = self.neuron.range_flags();
        let mut check = |name: &str, v: f64, (lo, hi): (f64, f64)| {
            if v < lo || v > hi {
                flags.push(format!("{name} = {v} outside [{lo}, {hi}]"));
            }
        };
        check("sigma0", self.sigma0, Self::SIGMA0_RANGE);
        check("mu0", self.mu0, Self::MU0_RANGE);
        check("d_sigma", self.d_sigma, Self::NOISE_INTENSITY_RANGE);
        check("d_mu", self.d_mu, Self::NOISE_INTENSITY_RANGE);
        flags
    }
}

/// Initial states: `x` uniform in `[0, 1)` from the seeded stream, `y = phi = 1`.
pub fn init_states(config: &NetworkConfig) -> Vec<NeuronState> {
    let n = config.n_nodes as u64;
    let mut block = CounterRng::new(config.seed).block(Purpose::InitialState, 0, n);
    (0..config.n_nodes)
        .map(|_| NeuronState::new(block.unit(), 1.0, 1.0))
        .collect()
}

/// The `2R` ring neighbours of peripheral `m`, ordered `m-R, ..., m-1,
/// m+1, ..., m+R` with wrap-around over the peripherals only.
pub fn ring_neighbors(m: usize, config: &NetworkConfig) -> Result<Vec<usize>> {
    if m == CENTRAL || m >= config.n_nodes {
        return Err(Error::Index {
            index: m,
            expected: "peripheral node",
            n_nodes: config.n_nodes,
        });
    }
    let p = config.n_peripherals();
    let r = config.r_neighbors;
    Ok(ring_offsets(r)
        .map(|d| 1 + wrap(m - 1, d, p))
        .collect())
}

fn ring_offsets(r: usize) -> impl Iterator<Item = isize> {
    let r = r as isize;
    (-r..=r).filter(|&d| d != 0)
}

#[inline]
fn wrap(p: usize, d: isize, n: usize) -> usize {
    (p as isize + d).rem_euclid(n as isize) as usize
}

/// On/off state of one coupling layer for a single step.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkActivity {
    Layer(bool),
    /// Star: indexed by peripheral `m - 1`. Ring: indexed by `(m - 1) * R + (d - 1)`
    /// for the link from peripheral `m` to the one `d` places ahead.
    PerLink(Vec<bool>),
}

impl LinkActivity {
    pub fn any(&self) -> bool {
        match self {
            LinkActivity::Layer(on) => *on,
            LinkActivity::PerLink(v) => v.iter().any(|&b| b),
        }
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        match self {
            LinkActivity::Layer(on) => *on,
            LinkActivity::PerLink(v) => v[i],
        }
    }
}

/// Couplings realized at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDraw {
    /// Ring coupling per node (the hub entry is drawn but unused).
    pub sigma: Vec<f64>,
    /// Star coupling per node (the hub term vanishes identically).
    pub mu: Vec<f64>,
    pub ring: LinkActivity,
    pub star: LinkActivity,
}

impl CouplingDraw {
    /// Homogeneous couplings with both layers switched as given.
    pub fn uniform(n_nodes: usize, sigma: f64, mu: f64, ring_active: bool, star_active: bool) -> Self {
        Self {
            sigma: vec![sigma; n_nodes],
            mu: vec![mu; n_nodes],
            ring: LinkActivity::Layer(ring_active),
            star: LinkActivity::Layer(star_active),
        }
    }

    fn empty(config: &NetworkConfig) -> Self {
        let n = config.n_nodes;
        let (ring, star) = match config.link_mode {
            LinkMode::Layer => (LinkActivity::Layer(false), LinkActivity::Layer(false)),
            LinkMode::PerLink => (
                LinkActivity::PerLink(vec![false; config.n_peripherals() * config.r_neighbors]),
                LinkActivity::PerLink(vec![false; config.n_peripherals()]),
            ),
        };
        Self {
            sigma: vec![0.0; n],
            mu: vec![0.0; n],
            ring,
            star,
        }
    }

    /// `true` when the ring link between peripherals `p` and `p + d` (0-based
    /// peripheral positions, `d` in `1..=R`) is active.
    #[inline]
    fn ring_link(&self, p: usize, d: usize, r: usize) -> bool {
        self.ring.get(p * r + d - 1)
    }
}

/// Draws the couplings of step `step`.
pub fn draw_couplings(config: &NetworkConfig, rng: &CounterRng, step: u64) -> CouplingDraw {
    let mut draw = CouplingDraw::empty(config);
    fill_couplings(&mut draw, config, rng, step);
    draw
}

fn fill_couplings(draw: &mut CouplingDraw, config: &NetworkConfig, rng: &CounterRng, step: u64) {
    let n = config.n_nodes as u64;
    let (lo, hi) = (config.noise_lo, config.noise_hi);

    let mut ring_noise = rng.block(Purpose::RingNoise, step, n);
    for s in draw.sigma.iter_mut() {
        *s = config.sigma0 + config.d_sigma * ring_noise.uniform(lo, hi);
    }
    let mut star_noise = rng.block(Purpose::StarNoise, step, n);
    for m in draw.mu.iter_mut() {
        *m = config.mu0 + config.d_mu * star_noise.uniform(lo, hi);
    }

    let ring_links = (config.n_peripherals() * config.r_neighbors) as u64;
    let star_links = config.n_peripherals() as u64;
    match (&mut draw.ring, &mut draw.star) {
        (LinkActivity::Layer(ring), LinkActivity::Layer(star)) => {
            *ring = rng.block(Purpose::RingLinks, step, 1).bernoulli(config.p_sigma);
            *star = rng.block(Purpose::StarLinks, step, 1).bernoulli(config.p_mu);
        }
        (LinkActivity::PerLink(ring), LinkActivity::PerLink(star)) => {
            let mut b = rng.block(Purpose::RingLinks, step, ring_links);
            ring.iter_mut().for_each(|v| *v = b.bernoulli(config.p_sigma));
            let mut b = rng.block(Purpose::StarLinks, step, star_links);
            star.iter_mut().for_each(|v| *v = b.bernoulli(config.p_mu));
        }
        _ => unreachable!("link activity layout follows the config link mode"),
    }
}

/// Synchronous update of all nodes from the states at step `n`.
pub fn network_step(states: &[NeuronState], draw: &CouplingDraw, config: &NetworkConfig) -> Result<Vec<NeuronState>> {
    let mut next = vec![NeuronState::new(0.0, 0.0, 0.0); states.len()];
    network_step_into(states, &mut next, draw, config).map_err(|(node, detail)| Error::Divergence { step: 0, node, detail })?;
    Ok(next)
}

fn network_step_into(
    prev: &[NeuronState],
    next: &mut [NeuronState],
    draw: &CouplingDraw,
    config: &NetworkConfig,
) -> std::result::Result<(), (usize, String)> {
    let n = config.n_nodes;
    let p_count = n - 1;
    let r = config.r_neighbors;
    let params = &config.neuron;
    debug_assert_eq!(prev.len(), n);

    let hub_x = prev[CENTRAL].x;
    let star_sign = config.star_difference.sign();
    let ring_sign = config.ring_difference.sign();
    let ring_scale = ring_sign / (2 * r) as f64;

    // Hub.
    let mut hub_coupling = 0.0;
    if draw.star.any() {
        for (i, s) in prev.iter().enumerate().skip(1) {
            if draw.star.get(i - 1) {
                hub_coupling += draw.mu[i] * (s.x - hub_x);
            }
        }
    }
    let hub = &prev[CENTRAL];
    next[CENTRAL] = NeuronState {
        x: local_activation(hub, params) + hub_coupling,
        y: recovery(hub, params),
        phi: flux(hub, params),
    };

    // Peripherals.
    let ring_on = draw.ring.any();
    for p in 0..p_count {
        let m = p + 1;
        let s = &prev[m];
        let mut x = local_activation(s, params);
        if draw.star.get(p) {
            x += star_sign * draw.mu[m] * (s.x - hub_x);
        }
        if ring_on {
            let mut sum = 0.0;
            for d in 1..=r {
                let behind = (p + p_count - d) % p_count;
                if draw.ring_link(behind, d, r) {
                    let i = behind + 1;
                    sum += draw.sigma[i] * (prev[i].x - s.x);
                }
                if draw.ring_link(p, d, r) {
                    let i = (p + d) % p_count + 1;
                    sum += draw.sigma[i] * (prev[i].x - s.x);
                }
            }
            x += ring_scale * sum;
        }
        next[m] = NeuronState {
            x,
            y: recovery(s, params),
            phi: flux(s, params),
        };
    }

    for (i, s) in next.iter().enumerate() {
        check_state(s, config.divergence_guard).map_err(|d| (i, d))?;
    }
    Ok(())
}

/// Post-transient history of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBlock {
    n_nodes: usize,
    n_steps: usize,
    /// Row-major `n_nodes x n_steps`.
    x: Vec<f64>,
    y: Option<Vec<f64>>,
    phi: Option<Vec<f64>>,
    final_states: Vec<NeuronState>,
}

impl TrajectoryBlock {
    /// Builds an `x`-only block from per-node rows of equal length. Final
    /// states take the last `x` of each row with `y = phi = 0`.
    pub fn from_x_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_nodes = rows.len();
        let n_steps = rows.first().map_or(0, Vec::len);
        if n_nodes == 0 || n_steps == 0 {
            return Err(Error::TooShort { len: n_steps, min: 1 });
        }
        if rows.iter().any(|r| r.len() != n_steps) {
            return Err(Error::Config("rows of unequal length".into()));
        }
        Ok(Self {
            n_nodes,
            n_steps,
            x: rows.concat(),
            y: None,
            phi: None,
            final_states: rows.iter().map(|r| NeuronState::new(r[n_steps - 1], 0.0, 0.0)).collect(),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn x_row(&self, node: usize) -> &[f64] {
        &self.x[node * self.n_steps..(node + 1) * self.n_steps]
    }

    pub fn x_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.n_steps)
    }

    pub fn y_row(&self, node: usize) -> Option<&[f64]> {
        self.y.as_ref().map(|y| &y[node * self.n_steps..(node + 1) * self.n_steps])
    }

    pub fn phi_row(&self, node: usize) -> Option<&[f64]> {
        self.phi.as_ref().map(|p| &p[node * self.n_steps..(node + 1) * self.n_steps])
    }

    pub fn final_states(&self) -> &[NeuronState] {
        &self.final_states
    }

    pub fn last_instance(&self) -> Vec<f64> {
        self.final_states.iter().map(|s| s.x).collect()
    }
}

/// Runs the network for `n_total` steps and keeps the last
/// `n_total - n_transient` states of every node.
pub fn run(config: &NetworkConfig) -> Result<TrajectoryBlock> {
    config.validate()?;
    let n = config.n_nodes;
    let cols = config.n_recorded();
    let rng = CounterRng::new(config.seed);

    let mut x = vec![0.0; n * cols];
    let (mut ys, mut phis) = if config.record_full_state {
        (Some(vec![0.0; n * cols]), Some(vec![0.0; n * cols]))
    } else {
        (None, None)
    };

    let mut prev = init_states(config);
    let mut next = prev.clone();
    let mut draw = CouplingDraw::empty(config);
    for step in 0..config.n_total {
        fill_couplings(&mut draw, config, &rng, step as u64);
        network_step_into(&prev, &mut next, &draw, config).map_err(|(node, detail)| Error::Divergence {
            step,
            node,
            detail,
        })?;
        std::mem::swap(&mut prev, &mut next);
        if step >= config.n_transient {
            let col = step - config.n_transient;
            for (i, s) in prev.iter().enumerate() {
                x[i * cols + col] = s.x;
            }
            if let (Some(ys), Some(phis)) = (ys.as_mut(), phis.as_mut()) {
                for (i, s) in prev.iter().enumerate() {
                    ys[i * cols + col] = s.y;
                    phis[i * cols + col] = s.phi;
                }
            }
        }
    }

    Ok(TrajectoryBlock {
        n_nodes: n,
        n_steps: cols,
        x,
        y: ys.take(),
        phi: phis.take(),
        final_states: prev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::step;

    fn small(n: usize, r: usize) -> NetworkConfig {
        NetworkConfig {
            n_nodes: n,
            r_neighbors: r,
            n_total: 200,
            n_transient: 100,
            ..Default::default()
        }
    }

    // Spec examples use 1-based node numbers; these helpers translate.
    fn one_based(v: Vec<usize>) -> Vec<usize> {
        v.into_iter().map(|i| i + 1).collect()
    }

    #[test]
    fn neighbors_wrap_below() {
        let c = small(100, 2);
        assert_eq!(one_based(ring_neighbors(1, &c).unwrap()), vec![99, 100, 3, 4]);
    }

    #[test]
    fn neighbors_interior() {
        let c = small(100, 2);
        assert_eq!(one_based(ring_neighbors(49, &c).unwrap()), vec![48, 49, 51, 52]);
    }

    #[test]
    fn neighbors_wrap_above() {
        let c = small(100, 2);
        assert_eq!(one_based(ring_neighbors(99, &c).unwrap()), vec![98, 99, 2, 3]);
    }

    #[test]
    fn neighbors_reject_hub_and_out_of_range() {
        let c = small(100, 2);
        assert!(matches!(ring_neighbors(0, &c), Err(Error::Index { .. })));
        assert!(matches!(ring_neighbors(100, &c), Err(Error::Index { .. })));
    }

    #[test]
    fn init_states_fixed_recovery_and_flux() {
        let c = small(50, 2);
        let s = init_states(&c);
        assert!(s.iter().all(|s| s.y == 1.0 && s.phi == 1.0));
        assert!(s.iter().all(|s| (0.0..1.0).contains(&s.x)));
        assert_eq!(s, init_states(&c));
        let other = init_states(&NetworkConfig { seed: 1, ..c });
        assert_ne!(s, other);
    }

    #[test]
    fn zero_noise_gives_mean_couplings() {
        let c = NetworkConfig {
            sigma0: -0.004,
            mu0: 0.0007,
            ..small(20, 2)
        };
        let d = draw_couplings(&c, &CounterRng::new(3), 11);
        assert!(d.sigma.iter().all(|&s| s == -0.004));
        assert!(d.mu.iter().all(|&m| m == 0.0007));
    }

    #[test]
    fn certain_and_impossible_links() {
        let rng = CounterRng::new(5);
        let on = small(20, 2);
        let off = NetworkConfig {
            p_mu: 0.0,
            p_sigma: 0.0,
            ..on.clone()
        };
        for step in 0..500 {
            let d = draw_couplings(&on, &rng, step);
            assert_eq!((d.ring.clone(), d.star.clone()), (LinkActivity::Layer(true), LinkActivity::Layer(true)));
            let d = draw_couplings(&off, &rng, step);
            assert!(!d.ring.any() && !d.star.any());
        }
    }

    #[test]
    fn per_link_layout() {
        let c = NetworkConfig {
            link_mode: LinkMode::PerLink,
            p_sigma: 0.5,
            p_mu: 0.5,
            ..small(20, 3)
        };
        let d = draw_couplings(&c, &CounterRng::new(2), 0);
        match (&d.ring, &d.star) {
            (LinkActivity::PerLink(r), LinkActivity::PerLink(s)) => {
                assert_eq!(r.len(), 19 * 3);
                assert_eq!(s.len(), 19);
            }
            _ => panic!("expected per-link activity"),
        }
    }

    #[test]
    fn hub_without_star_is_uncoupled() {
        let c = NetworkConfig {
            sigma0: 0.01,
            ..small(10, 2)
        };
        let states: Vec<_> = (0..10).map(|i| NeuronState::new(0.1 * i as f64, 1.0, 0.5)).collect();
        let draw = CouplingDraw::uniform(10, 0.01, 0.3, true, false);
        let next = network_step(&states, &draw, &c).unwrap();
        assert_eq!(next[CENTRAL], step(&states[CENTRAL], &c.neuron).unwrap());
    }

    #[test]
    fn identical_states_advance_as_single_neuron() {
        let c = small(12, 3);
        let s = NeuronState::new(0.37, 1.1, 0.4);
        let states = vec![s; 12];
        let mut draw = CouplingDraw::uniform(12, 0.0, 0.0, true, true);
        for (i, v) in draw.sigma.iter_mut().enumerate() {
            *v = -0.01 + 0.001 * i as f64;
        }
        for (i, v) in draw.mu.iter_mut().enumerate() {
            *v = 0.002 - 0.0003 * i as f64;
        }
        let next = network_step(&states, &draw, &c).unwrap();
        let single = step(&s, &c.neuron).unwrap();
        assert!(next.iter().all(|n| *n == single));
    }

    #[test]
    fn decoupled_step_is_independent() {
        let c = small(8, 1);
        let states: Vec<_> = (0..8).map(|i| NeuronState::new(0.05 + 0.1 * i as f64, 0.9, -0.3)).collect();
        let draw = CouplingDraw::uniform(8, 0.0, 0.0, true, true);
        let next = network_step(&states, &draw, &c).unwrap();
        for (a, b) in next.iter().zip(&states) {
            assert_eq!(*a, step(b, &c.neuron).unwrap());
        }
    }

    #[test]
    fn run_shapes_and_determinism() {
        let c = NetworkConfig {
            sigma0: -0.01,
            mu0: 0.001,
            d_sigma: 0.1,
            d_mu: 0.1,
            p_sigma: 0.5,
            p_mu: 0.5,
            record_full_state: true,
            seed: 17,
            ..small(30, 2)
        };
        let a = run(&c).unwrap();
        assert_eq!(a.n_nodes(), 30);
        assert_eq!(a.n_steps(), 100);
        assert!(a.y_row(3).is_some() && a.phi_row(3).is_some());
        assert_eq!(a.final_states()[4].x, *a.x_row(4).last().unwrap());
        assert_eq!(a, run(&c).unwrap());
    }

    #[test]
    fn divergence_reports_step_and_node() {
        let c = NetworkConfig {
            neuron: NeuronParams::with_k(40.0),
            ..small(10, 1)
        };
        match run(&c) {
            Err(Error::Divergence { step, node, .. }) => {
                assert!(step < c.n_total);
                assert!(node < 10);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn validation() {
        assert!(small(4, 1).validate().is_ok());
        assert!(small(5, 2).validate().is_err());
        assert!(small(6, 2).validate().is_ok());
        assert!(NetworkConfig { p_mu: 1.5, ..small(10, 1) }.validate().is_err());
        assert!(NetworkConfig { n_transient: 200, ..small(10, 1) }.validate().is_err());
        let wide = NetworkConfig { sigma0: 0.5, ..small(10, 1) };
        assert!(wide.validate().is_ok());
        assert_eq!(wide.range_flags().len(), 1);
        assert!(NetworkConfig { strict_ranges: true, ..wide }.validate().is_err());
    }
}
