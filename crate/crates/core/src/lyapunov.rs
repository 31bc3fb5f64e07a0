//! Lyapunov exponents of three-dimensional maps by repeated QR
//! re-orthonormalization of a tangent frame.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuron::{at_step, ChialvoMap, Map3, NeuronParams, NeuronState};

/// Minimum number of averaged iterations.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Exponents per iteration, in the order produced by the QR columns.
    pub exponents: [f64; 3],
    pub n_sample: usize,
}

impl LyapunovSpectrum {
    pub fn max(&self) -> f64 {
        self.exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Full spectrum of `map` along the orbit of `initial`.
///
/// The orbit is advanced `n_transient` steps first. Over the next `n_sample`
/// steps the frame `Q` is pushed through the Jacobian and re-factored,
/// accumulating `ln |R_ii|`.
pub fn lyapunov_spectrum<M: Map3>(
    map: &M,
    initial: NeuronState,
    n_transient: usize,
    n_sample: usize,
) -> Result<LyapunovSpectrum> {
    if n_sample < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "n_sample must be at least {MIN_SAMPLES}, got {n_sample}"
        )));
    }
    let mut state = initial;
    for i in 0..n_transient {
        state = map.advance(&state).map_err(|e| at_step(e, i))?;
    }

    let mut frame = Matrix3::<f64>::identity();
    let mut sums = [0.0f64; 3];
    for i in 0..n_sample {
        let qr = (map.jacobian_at(&state) * frame).qr();
        let r = qr.r();
        for (k, acc) in sums.iter_mut().enumerate() {
            *acc += r[(k, k)].abs().ln();
        }
        frame = qr.q();
        state = map.advance(&state).map_err(|e| at_step(e, n_transient + i))?;
    }

    let n = n_sample as f64;
    Ok(LyapunovSpectrum {
        exponents: sums.map(|s| s / n),
        n_sample,
    })
}

/// Leading Lyapunov exponent of the neuron map.
pub fn max_lyapunov(
    initial: NeuronState,
    params: &NeuronParams,
    n_transient: usize,
    n_sample: usize,
) -> Result<f64> {
    lyapunov_spectrum(&ChialvoMap::new(*params), initial, n_transient, n_sample).map(|s| s.max())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Matrix3<f64>);

    impl Map3 for Diagonal {
        fn advance(&self, s: &NeuronState) -> Result<NeuronState> {
            Ok(NeuronState::new(
                self.0[(0, 0)] * s.x,
                self.0[(1, 1)] * s.y,
                self.0[(2, 2)] * s.phi,
            ))
        }

        fn jacobian_at(&self, _: &NeuronState) -> Matrix3<f64> {
            self.0
        }
    }

    #[test]
    fn constant_linear_map_is_exact() {
        let map = Diagonal(Matrix3::from_diagonal(&nalgebra::Vector3::new(0.5, 0.3, 0.1)));
        let spec = lyapunov_spectrum(&map, NeuronState::new(1.0, 1.0, 1.0), 0, 5000).unwrap();
        assert!((spec.max() - 0.5f64.ln()).abs() < 1e-12);
        assert!((spec.exponents[1] - 0.3f64.ln()).abs() < 1e-12);
        assert!((spec.exponents[2] - 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn non_normal_constant_map_uses_spectral_radius() {
        // Upper-triangular with eigenvalues 0.9, 0.4, -0.2.
        struct Tri;
        impl Map3 for Tri {
            fn advance(&self, s: &NeuronState) -> Result<NeuronState> {
                Ok(*s)
            }
            fn jacobian_at(&self, _: &NeuronState) -> Matrix3<f64> {
                Matrix3::new(0.9, 3.0, -1.0, 0.0, 0.4, 2.0, 0.0, 0.0, -0.2)
            }
        }
        let spec = lyapunov_spectrum(&Tri, NeuronState::default(), 0, 20000).unwrap();
        assert!((spec.max() - 0.9f64.ln()).abs() < 1e-3, "{:?}", spec);
    }

    #[test]
    fn rejects_short_sampling() {
        let err = max_lyapunov(NeuronState::default(), &NeuronParams::default(), 0, 999).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn deterministic() {
        let p = NeuronParams::default();
        let a = max_lyapunov(NeuronState::default(), &p, 500, 2000).unwrap();
        let b = max_lyapunov(NeuronState::default(), &p, 500, 2000).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
