//! Distribution functions on the extended real line and the pointwise
//! extremal convolution calculus built on them.
//!
//! A [`Cdf`] is a cheap, immutable, shareable handle around any
//! [`Distribution`]. Parametric laws evaluate closed forms, empirical and
//! tabulated data use [`SteppedCdf`], and every operation in [`ops`] returns a
//! lazy derived distribution that evaluates its defining formula exactly at
//! each query point.

mod grid;
pub mod ops;
mod stepped;
pub mod table;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::first_true;

pub use grid::{sup_distance, GridSpec};
pub use ops::{
    atom_decomposition_max, classical_max_conv, exceedance_cdf, free_max_conv, free_max_iterate,
    free_max_power, free_min_conv, lower_endpoint_iterate, reflect, rescale, threshold_un,
    MeasureDecomposition,
};
pub use stepped::{Interpolation, SteppedCdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdfKind {
    Parametric,
    Stepped,
    Derived,
}

/// Evaluation contract of a right-continuous distribution function.
///
/// Implementations must accept `±∞` arguments. `tail` should be computed
/// directly where cancellation in `1 - cdf` would lose precision.
pub trait Distribution: Send + Sync + fmt::Debug {
    fn cdf(&self, x: f64) -> f64;

    /// Left limit `F(x⁻)`.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    fn tail(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// Lower support endpoint `α(F) = inf{x : F(x) > 0}`.
    fn lower(&self) -> f64;

    /// Upper support endpoint `ω(F) = inf{x : F(x) = 1}`.
    fn upper(&self) -> f64;

    fn kind(&self) -> CdfKind;

    /// `F̄(ω − h)` for a finite upper endpoint, computed without forming
    /// `ω − h` where the implementation can avoid it.
    fn gap_tail(&self, h: f64) -> f64 {
        if h <= 0.0 {
            0.0
        } else {
            self.tail(self.upper() - h)
        }
    }

    /// `ω − inf{x : F̄(x) < q}`, the distance from the upper endpoint to the
    /// point where the tail drops below `q`.
    fn gap_inverse(&self, q: f64) -> f64 {
        self.upper() - self.tail_inverse(q, true)
    }

    /// `inf{x : F̄(x) ≤ q}`, or `inf{x : F̄(x) < q}` when `strict`.
    fn tail_inverse(&self, q: f64, strict: bool) -> f64 {
        if let Some(edge) = tail_inverse_edge(self.lower(), q, strict) {
            return edge;
        }
        first_true(self.lower(), self.upper(), |x| {
            let t = self.tail(x);
            if strict {
                t < q
            } else {
                t <= q
            }
        })
        .unwrap_or(f64::INFINITY)
    }

    /// Generalized inverse `inf{x : F(x) ≥ p}` for `p ∈ [0, 1]`.
    fn generalized_inverse(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.tail_inverse(1.0 - p, false)
    }
}

/// Answers for the levels where the tail inverse is determined by the
/// support alone: `q ≥ 1` and `q < 0` (and `q = 0` when strict).
pub(crate) fn tail_inverse_edge(lower: f64, q: f64, strict: bool) -> Option<f64> {
    if q > 1.0 || (q == 1.0 && !strict) {
        Some(f64::NEG_INFINITY)
    } else if q == 1.0 {
        Some(lower)
    } else if q < 0.0 || (q == 0.0 && strict) {
        Some(f64::INFINITY)
    } else {
        None
    }
}

/// Shared handle to an immutable distribution function.
#[derive(Clone)]
pub struct Cdf(Arc<dyn Distribution>);

impl Cdf {
    pub fn new(d: impl Distribution + 'static) -> Self {
        Cdf(Arc::new(d))
    }

    /// `inf{x : F(x) ≥ p}`; `quantile(0) = −∞`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p", format!("{p} is not in [0, 1]")));
        }
        Ok(self.0.generalized_inverse(p))
    }

    /// Piecewise-linear tabulation of this CDF on `grid`.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Cdf> {
        let values: Vec<f64> = grid.iter().map(|&x| self.cdf(x)).collect();
        Ok(Cdf::new(SteppedCdf::tabulated(grid.to_vec(), values)?))
    }

    pub fn alpha(&self) -> f64 {
        self.lower()
    }

    pub fn omega(&self) -> f64 {
        self.upper()
    }
}

impl Deref for Cdf {
    type Target = dyn Distribution;

    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl fmt::Debug for Cdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Empirical distribution function with a jump of `1/n` at every sample.
pub fn empirical_cdf(samples: &[f64]) -> Result<Cdf> {
    Ok(Cdf::new(SteppedCdf::empirical(samples)?))
}

/// Kolmogorov–Smirnov distance `sup |F_n − F|` between the empirical law of
/// `samples` and `cdf`, using both one-sided limits at every jump.
pub fn ks_distance(samples: &[f64], cdf: &Cdf) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "empty sample"));
    }
    let mut xs = samples.to_vec();
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("samples", "NaN in sample"));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d
            .max((cdf.cdf_left(x) - below).abs())
            .max((cdf.cdf(x) - at).abs());
        i = j;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_levels() {
        assert_eq!(tail_inverse_edge(0.0, 1.0, false), Some(f64::NEG_INFINITY));
        assert_eq!(tail_inverse_edge(0.5, 1.0, true), Some(0.5));
        assert_eq!(tail_inverse_edge(0.5, 0.0, true), Some(f64::INFINITY));
        assert_eq!(tail_inverse_edge(0.5, 0.3, true), None);
    }

    #[test]
    fn empirical_quantiles() {
        let f = empirical_cdf(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.quantile(0.5).unwrap(), 2.0);
        assert_eq!(f.quantile(1.0 / 3.0).unwrap(), 1.0);
        assert_eq!(f.quantile(1.0).unwrap(), 3.0);
        assert_eq!(f.quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(f.quantile(1.5).is_err());
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn ks_of_exact_sample() {
        let f = empirical_cdf(&[0.0, 1.0]).unwrap();
        assert_eq!(ks_distance(&[0.0, 1.0], &f).unwrap(), 0.0);
        let g = empirical_cdf(&[0.0]).unwrap();
        assert_eq!(ks_distance(&[1.0], &g).unwrap(), 1.0);
    }
}
