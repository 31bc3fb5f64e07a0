//! Single Chialvo neuron map with electromagnetic flux coupling.
//!
//! The state is `(x, y, phi)`: activation, recovery and magnetic flux. With
//! `k = 0` the flux decouples from `x` and the map reduces to the original
//! two-variable Chialvo update.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on `|x|` before an iterate is declared divergent.
pub const DEFAULT_DIVERGENCE_GUARD: f64 = 1e6;

/// Local constants of the neuron map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronParams {
    /// Time constant of recovery.
    pub a: f64,
    /// Activation dependence of recovery.
    pub b: f64,
    /// Recovery offset.
    pub c: f64,
    /// Time-independent additive perturbation.
    pub k0: f64,
    /// Memconductance constant term.
    pub alpha: f64,
    /// Memconductance quadratic coefficient.
    pub beta: f64,
    /// Membrane-potential induced flux gain.
    pub k1: f64,
    /// Flux leakage.
    pub k2: f64,
    /// Electromagnetic flux coupling strength.
    pub k: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            a: 0.89,
            b: 0.6,
            c: 0.28,
            k0: 0.04,
            alpha: 0.1,
            beta: 0.2,
            k1: 0.1,
            k2: 0.2,
            k: -1.0,
        }
    }
}

impl NeuronParams {
    /// Admissible range of the flux coupling `k` in the reference setting.
    pub const K_RANGE: (f64, f64) = (-1.0, 4.0);

    /// Defaults with the flux coupling replaced.
    pub fn with_k(k: f64) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    /// Checks the hard constraints: finite values, `a < 1`, `b < 1`.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("c", self.c),
            ("k0", self.k0),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k", self.k),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Config(format!("neuron.{name} must be finite")));
        }
        if self.a >= 1.0 {
            return Err(Error::Config(format!("neuron.a must be < 1, got {}", self.a)));
        }
        if self.b >= 1.0 {
            return Err(Error::Config(format!("neuron.b must be < 1, got {}", self.b)));
        }
        Ok(())
    }

    /// Soft range checks. Values outside the reference ranges are allowed
    /// but reported here.
    pub fn range_flags(&self) -> Vec<String> {
        let (lo, hi) = Self::K_RANGE;
        if self.k < lo || self.k > hi {
            vec![format!("neuron.k = {} outside [{lo}, {hi}]", self.k)]
        } else {
            Vec::new()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeuronState {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl NeuronState {
    pub const fn new(x: f64, y: f64, phi: f64) -> Self {
        Self { x, y, phi }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.phi.is_finite()
    }
}

impl Default for NeuronState {
    /// Initial state used for single-neuron studies.
    fn default() -> Self {
        Self::new(0.5, 1.0, 1.0)
    }
}

/// `M(phi) = alpha + 3 beta phi^2`.
#[inline]
pub fn memconductance(phi: f64, params: &NeuronParams) -> f64 {
    params.alpha + 3.0 * params.beta * phi * phi
}

/// Uncoupled activation update `x^2 e^(y - x) + k0 + k x M(phi)`.
#[inline]
pub(crate) fn local_activation(s: &NeuronState, p: &NeuronParams) -> f64 {
    s.x * s.x * (s.y - s.x).exp() + p.k0 + p.k * s.x * memconductance(s.phi, p)
}

#[inline]
pub(crate) fn recovery(s: &NeuronState, p: &NeuronParams) -> f64 {
    p.a * s.y - p.b * s.x + p.c
}

#[inline]
pub(crate) fn flux(s: &NeuronState, p: &NeuronParams) -> f64 {
    p.k1 * s.x - p.k2 * s.phi
}

pub(crate) fn check_state(s: &NeuronState, guard: f64) -> std::result::Result<(), String> {
    if !s.is_finite() {
        Err(format!("non-finite state {s:?}"))
    } else if s.x.abs() > guard {
        Err(format!("|x| = {} exceeds guard {guard}", s.x.abs()))
    } else {
        Ok(())
    }
}

/// One iteration of the flux-augmented map with the default divergence guard.
pub fn step(state: &NeuronState, params: &NeuronParams) -> Result<NeuronState> {
    step_with_guard(state, params, DEFAULT_DIVERGENCE_GUARD)
}

pub fn step_with_guard(state: &NeuronState, params: &NeuronParams, guard: f64) -> Result<NeuronState> {
    let next = NeuronState {
        x: local_activation(state, params),
        y: recovery(state, params),
        phi: flux(state, params),
    };
    check_state(&next, guard).map_err(|detail| Error::Divergence {
        step: 0,
        node: 0,
        detail,
    })?;
    Ok(next)
}

/// Analytic Jacobian of [`step`] at `state`, rows ordered `(x, y, phi)`.
pub fn jacobian(state: &NeuronState, params: &NeuronParams) -> Matrix3<f64> {
    let NeuronState { x, y, phi } = *state;
    let e = (y - x).exp();
    let p = params;
    Matrix3::new(
        x * e * (2.0 - x) + p.k * memconductance(phi, p),
        x * x * e,
        6.0 * p.k * p.beta * x * phi,
        -p.b,
        p.a,
        0.0,
        p.k1,
        0.0,
        -p.k2,
    )
}

/// A smooth map on three-component states with a known Jacobian.
pub trait Map3 {
    fn advance(&self, state: &NeuronState) -> Result<NeuronState>;
    fn jacobian_at(&self, state: &NeuronState) -> Matrix3<f64>;
}

/// The neuron map bundled with its parameters and divergence guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChialvoMap {
    pub params: NeuronParams,
    pub guard: f64,
}

impl ChialvoMap {
    pub fn new(params: NeuronParams) -> Self {
        Self {
            params,
            guard: DEFAULT_DIVERGENCE_GUARD,
        }
    }

    /// Iterates `n` steps and returns the visited states, starting with the
    /// state after the first iteration.
    pub fn orbit(&self, initial: NeuronState, n: usize) -> Result<Vec<NeuronState>> {
        let mut out = Vec::with_capacity(n);
        let mut s = initial;
        for i in 0..n {
            s = step_with_guard(&s, &self.params, self.guard).map_err(|e| at_step(e, i))?;
            out.push(s);
        }
        Ok(out)
    }
}

impl Map3 for ChialvoMap {
    fn advance(&self, state: &NeuronState) -> Result<NeuronState> {
        step_with_guard(state, &self.params, self.guard)
    }

    fn jacobian_at(&self, state: &NeuronState) -> Matrix3<f64> {
        jacobian(state, &self.params)
    }
}

pub(crate) fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::Divergence { node, detail, .. } => Error::Divergence { step, node, detail },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn memconductance_values() {
        let p = NeuronParams::default();
        assert_eq!(memconductance(0.0, &p), 0.1);
        assert!(close(memconductance(1.0, &p), 0.7, 1e-15));
        assert_eq!(memconductance(-1.0, &p), memconductance(1.0, &p));
    }

    #[test]
    fn step_from_origin() {
        let p = NeuronParams::default();
        let s = step(&NeuronState::new(0.0, 0.0, 0.0), &p).unwrap();
        assert!(close(s.x, 0.04, 1e-15));
        assert!(close(s.y, 0.28, 1e-15));
        assert_eq!(s.phi, 0.0);
    }

    #[test]
    fn step_with_zero_activation() {
        let p = NeuronParams::default();
        let s = step(&NeuronState::new(0.0, 5.0, 3.0), &p).unwrap();
        assert!(close(s.x, 0.04, 1e-15));
        assert!(close(s.y, 4.73, 1e-12));
        assert!(close(s.phi, -0.6, 1e-15));
    }

    #[test]
    fn step_unit_state_negative_k() {
        // 1 * e^0 + 0.04 + (-1)(1)(0.1 + 0.6) = 0.34
        let p = NeuronParams::with_k(-1.0);
        let s = step(&NeuronState::new(1.0, 1.0, 1.0), &p).unwrap();
        assert!(close(s.x, 0.34, 1e-14), "{}", s.x);
    }

    #[test]
    fn k_zero_recovers_original_map() {
        let p = NeuronParams::with_k(0.0);
        for &(x, y, phi) in &[(0.3, 1.2, -4.0), (1.7, -0.2, 2.5), (-0.4, 0.9, 0.0)] {
            let s = step(&NeuronState::new(x, y, phi), &p).unwrap();
            assert_eq!(s.x, x * x * (y - x).exp() + p.k0);
            assert_eq!(s.y, p.a * y - p.b * x + p.c);
        }
    }

    #[test]
    fn jacobian_at_origin() {
        let j = jacobian(&NeuronState::new(0.0, 0.0, 0.0), &NeuronParams::with_k(-1.0));
        let expected = Matrix3::new(-0.1, 0.0, 0.0, -0.6, 0.89, 0.0, 0.1, 0.0, -0.2);
        assert!((j - expected).abs().max() < 1e-15, "{j}");
    }

    #[test]
    fn divergence_guard_trips() {
        let p = NeuronParams::default();
        let err = step(&NeuronState::new(50.0, 2000.0, 0.0), &p).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        let err = step(&NeuronState::new(f64::NAN, 0.0, 0.0), &p).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn params_validation() {
        assert!(NeuronParams::default().validate().is_ok());
        let bad = NeuronParams {
            a: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(NeuronParams::with_k(4.5).validate().is_ok());
        assert_eq!(NeuronParams::with_k(4.5).range_flags().len(), 1);
        assert!(NeuronParams::with_k(4.0).range_flags().is_empty());
    }
}
