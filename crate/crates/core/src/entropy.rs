//! Sample entropy of scalar series.
//!
//! `SE = -ln(A / B)` where `B` counts unordered pairs of length-`m` templates
//! whose Chebyshev distance is strictly below `r`, and `A` counts the pairs
//! that still match when extended to length `m + 1`. Both counts run over the
//! same first `T - m` template start positions, self-matches excluded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// Multiple of the population standard deviation of the series.
    Relative(f64),
    Absolute(f64),
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Relative(0.2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampEnConfig {
    pub emb_dim: usize,
    pub tolerance: Tolerance,
}

impl Default for SampEnConfig {
    fn default() -> Self {
        Self {
            emb_dim: 2,
            tolerance: Tolerance::default(),
        }
    }
}

/// Match counts and the resulting entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEntropy {
    /// `-ln(A/B)`, `+inf` when either count is zero.
    #[serde(with = "finite_or_inf")]
    pub value: f64,
    /// `B`: matching template pairs of length `m`.
    pub template_matches: u64,
    /// `A`: matching template pairs of length `m + 1`.
    pub extended_matches: u64,
    /// Resolved absolute radius.
    pub tolerance: f64,
}

impl SampleEntropy {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Population standard deviation.
pub fn population_std(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    (series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Absolute matching radius for `series`.
pub fn resolve_tolerance(series: &[f64], cfg: &SampEnConfig) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::TooShort { len: 0, min: 1 });
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::DegenerateSeries("constant series".into()));
    }
    let r = match cfg.tolerance {
        Tolerance::Absolute(r) => r,
        Tolerance::Relative(f) => f * population_std(series),
    };
    if r.is_nan() || r <= 0.0 {
        return Err(Error::DegenerateSeries(format!("tolerance resolves to {r}")));
    }
    Ok(r)
}

/// `(B, A)` for embedding dimension `m` and radius `r`.
///
/// Templates are sorted by their first value so each one only scans partners
/// whose first value lies within `r`; every candidate is then checked with
/// the same strict comparison used by the plain pairwise definition.
pub fn count_matches(series: &[f64], m: usize, r: f64) -> (u64, u64) {
    if m == 0 || series.len() < m + 2 {
        return (0, 0);
    }
    let n_templates = series.len() - m;
    let mut order: Vec<usize> = (0..n_templates).collect();
    order.sort_by(|&a, &b| series[a].total_cmp(&series[b]).then(a.cmp(&b)));

    let scan = |a: usize| -> (u64, u64) {
        let i = order[a];
        let head = series[i];
        let (mut b_count, mut a_count) = (0u64, 0u64);
        for &j in &order[a + 1..] {
            // Negated so that a NaN difference also ends the scan.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(series[j] - head < r) {
                break;
            }
            if (1..m).all(|k| (series[i + k] - series[j + k]).abs() < r) {
                b_count += 1;
                if (series[i + m] - series[j + m]).abs() < r {
                    a_count += 1;
                }
            }
        }
        (b_count, a_count)
    };

    let add = |x: (u64, u64), y: (u64, u64)| (x.0 + y.0, x.1 + y.1);
    if n_templates > 4096 {
        (0..n_templates).into_par_iter().map(scan).reduce(|| (0, 0), add)
    } else {
        (0..n_templates).map(scan).fold((0, 0), add)
    }
}

pub fn sample_entropy(series: &[f64], cfg: &SampEnConfig) -> Result<SampleEntropy> {
    let m = cfg.emb_dim;
    if m == 0 {
        return Err(Error::Config("emb_dim must be at least 1".into()));
    }
    if series.len() < m + 2 {
        return Err(Error::TooShort {
            len: series.len(),
            min: m + 2,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries("series contains non-finite values".into()));
    }
    let r = resolve_tolerance(series, cfg)?;
    let (b, a) = count_matches(series, m, r);
    let value = if a == 0 || b == 0 {
        f64::INFINITY
    } else {
        -(a as f64 / b as f64).ln()
    };
    Ok(SampleEntropy {
        value,
        template_matches: b,
        extended_matches: a,
        tolerance: r,
    })
}

/// Serializes non-finite entropies as the string `"inf"`.
pub mod finite_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}
