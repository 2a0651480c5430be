use serde::{Deserialize, Serialize};

use super::{CdfKind, Distribution};
use crate::error::{Error, Result};

/// Monotonicity and range violations up to this size are treated as
/// floating-point noise and clamped away.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `F = v_i` on `[x_i, x_{i+1})`.
    Constant,
    /// Linear between consecutive breakpoints.
    Linear,
}

/// Distribution function stored at finitely many breakpoints.
#[derive(Debug, Clone)]
pub struct SteppedCdf {
    xs: Vec<f64>,
    vs: Vec<f64>,
    mode: Interpolation,
}

impl SteppedCdf {
    /// Validates breakpoints and values. The final value must be 1.
    pub fn new(xs: Vec<f64>, vs: Vec<f64>, mode: Interpolation) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::NotACdf("no breakpoints".into()));
        }
        if xs.len() != vs.len() {
            return Err(Error::DimensionMismatch {
                left: xs.len(),
                right: vs.len(),
            });
        }
        if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
            return Err(Error::NotACdf(format!("non-finite breakpoint {x}")));
        }
        if let Some(w) = xs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::NotACdf(format!(
                "breakpoints not strictly increasing at {} → {}",
                w[0], w[1]
            )));
        }
        let vs = clamp_values(vs)?;
        let last = *vs.last().unwrap();
        if last < 1.0 {
            return Err(Error::NotACdf(format!("final value {last} is below 1")));
        }
        Ok(SteppedCdf { xs, vs, mode })
    }

    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "empty sample"));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("samples", format!("non-finite sample {x}")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if i + 1 < n && sorted[i + 1] == x {
                continue;
            }
            xs.push(x);
            vs.push((i + 1) as f64 / n as f64);
        }
        Ok(SteppedCdf {
            xs,
            vs,
            mode: Interpolation::Constant,
        })
    }

    /// Piecewise-linear CDF through `(x_i, F_i)`. A table that does not start
    /// at 0 or end at 1 is completed with one extra point at each open end,
    /// one mean grid spacing beyond the table.
    pub fn tabulated(mut xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(Error::NotACdf(format!(
                "table with {} abscissae and {} values",
                xs.len(),
                vs.len()
            )));
        }
        let mut vs = clamp_values(vs)?;
        let m = xs.len();
        let spacing = if m >= 2 {
            (xs[m - 1] - xs[0]) / (m - 1) as f64
        } else {
            1.0
        };
        if vs[0] > 0.0 {
            xs.insert(0, xs[0] - spacing);
            vs.insert(0, 0.0);
        }
        if *vs.last().unwrap() < 1.0 {
            xs.push(xs[xs.len() - 1] + spacing);
            vs.push(1.0);
        }
        SteppedCdf::new(xs, vs, Interpolation::Linear)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn interpolation(&self) -> Interpolation {
        self.mode
    }
}

fn clamp_values(mut vs: Vec<f64>) -> Result<Vec<f64>> {
    let mut prev = 0.0;
    for (i, v) in vs.iter_mut().enumerate() {
        if v.is_nan() || *v < -CLAMP_TOLERANCE || *v > 1.0 + CLAMP_TOLERANCE {
            return Err(Error::NotACdf(format!("value {v} at index {i} outside [0, 1]")));
        }
        if *v < prev - CLAMP_TOLERANCE {
            return Err(Error::NotACdf(format!(
                "value decreases from {prev} to {v} at index {i}"
            )));
        }
        *v = v.clamp(prev, 1.0);
        if *v > 1.0 - CLAMP_TOLERANCE {
            *v = 1.0;
        }
        prev = *v;
    }
    Ok(vs)
}

impl Distribution for SteppedCdf {
    fn cdf(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&b| b <= x);
        if k == 0 {
            return 0.0;
        }
        let i = k - 1;
        match self.mode {
            Interpolation::Constant => self.vs[i],
            Interpolation::Linear => {
                if i + 1 == self.xs.len() {
                    self.vs[i]
                } else {
                    let (x0, x1) = (self.xs[i], self.xs[i + 1]);
                    let (v0, v1) = (self.vs[i], self.vs[i + 1]);
                    v0 + (v1 - v0) * ((x - x0) / (x1 - x0))
                }
            }
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        match self.mode {
            Interpolation::Constant => {
                let k = self.xs.partition_point(|&b| b < x);
                if k == 0 {
                    0.0
                } else {
                    self.vs[k - 1]
                }
            }
            Interpolation::Linear => {
                if x <= self.xs[0] {
                    0.0
                } else {
                    self.cdf(x)
                }
            }
        }
    }

    fn lower(&self) -> f64 {
        let i = self.vs.iter().position(|&v| v > 0.0).unwrap();
        match self.mode {
            Interpolation::Linear if i > 0 => self.xs[i - 1],
            _ => self.xs[i],
        }
    }

    fn upper(&self) -> f64 {
        let i = self.vs.iter().position(|&v| v >= 1.0).unwrap();
        self.xs[i]
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Stepped
    }

    fn generalized_inverse(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self.mode {
            Interpolation::Constant => {
                let i = self.vs.partition_point(|&v| v < p);
                self.xs[i.min(self.xs.len() - 1)]
            }
            Interpolation::Linear => self.tail_inverse(1.0 - p, false),
        }
    }
}
