use serde::{Deserialize, Serialize};

use super::Cdf;
use crate::error::{Error, Result};
use crate::numeric::linspace;

/// Evaluation grid: `points` equally spaced abscissae spanning the
/// `[p_lo, p_hi]` quantile range of every participating CDF, plus each
/// finite support endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points: 2001,
            p_lo: 1e-4,
            p_hi: 1.0 - 1e-4,
        }
    }
}

impl GridSpec {
    pub fn with_points(points: usize) -> Self {
        GridSpec {
            points,
            ..GridSpec::default()
        }
    }

    pub fn build(&self, cdfs: &[&Cdf]) -> Result<Vec<f64>> {
        if cdfs.is_empty() {
            return Err(Error::invalid("cdfs", "no distribution to span"));
        }
        if self.points < 2 {
            return Err(Error::invalid("points", "a grid needs at least 2 points"));
        }
        if !(0.0 < self.p_lo && self.p_lo < self.p_hi && self.p_hi < 1.0) {
            return Err(Error::invalid(
                "p_lo/p_hi",
                format!("need 0 < {} < {} < 1", self.p_lo, self.p_hi),
            ));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut extra = Vec::new();
        for f in cdfs {
            lo = lo.min(f.quantile(self.p_lo)?);
            hi = hi.max(f.quantile(self.p_hi)?);
            extra.extend([f.lower(), f.upper()].into_iter().filter(|x| x.is_finite()));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "grid quantile range [{lo}, {hi}] is not finite"
            )));
        }
        if lo == hi {
            lo -= 1.0;
            hi += 1.0;
        }
        let mut grid = linspace(lo, hi, self.points);
        grid.extend(extra);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        Ok(grid)
    }
}

/// `max_i |F(x_i) − G(x_i)|` over the grid.
pub fn sup_distance(f: &Cdf, g: &Cdf, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&x| (f.cdf(x) - g.cdf(x)).abs())
        .fold(0.0, f64::max)
}
