//! Free max-stability: closed-form stability constants, numerical
//! verification, the correspondence with generalized Pareto laws, and the
//! map `f_c` carrying classical extreme-value laws onto free ones.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{make_law, LawKind, LawSpec};
use crate::cdf::{free_max_iterate, rescale, sup_distance, Cdf, CdfKind, Distribution, GridSpec};
use crate::error::{Error, Result};
use crate::numeric::nelder_mead_2d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FreeType {
    I,
    II,
    III,
}

impl FreeType {
    pub fn law_kind(self) -> LawKind {
        match self {
            FreeType::I => LawKind::FreeTypeI,
            FreeType::II => LawKind::FreeTypeII,
            FreeType::III => LawKind::FreeTypeIII,
        }
    }

    /// Standard law of this type (`alpha` ignored for type I).
    pub fn law(self, alpha: f64) -> Result<Cdf> {
        make_law(&LawSpec::with_shape(self.law_kind(), alpha))
    }
}

impl std::str::FromStr for FreeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(FreeType::I),
            "II" | "2" => Ok(FreeType::II),
            "III" | "3" => Ok(FreeType::III),
            _ => Err(Error::invalid("type", format!("`{s}` is not one of I, II, III"))),
        }
    }
}

/// Constants with `G^{⊡s}(a(s)·x + b(s)) = G(x)`, `a(s) = s^θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstants {
    pub s: f64,
    pub a_of_s: f64,
    pub b_of_s: f64,
    pub theta: f64,
    /// Type I: drift coefficient in `b(s) = c·ln s`. Types II/III: the
    /// common fixed point of the affine maps, here 0.
    pub c: f64,
}

pub fn stability_constants(kind: FreeType, alpha: f64, s: f64) -> Result<StabilityConstants> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::invalid("s", format!("{s} is not a finite real ≥ 1")));
    }
    if kind != FreeType::I && !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("{alpha} must be positive")));
    }
    let (theta, b, c) = match kind {
        FreeType::I => (0.0, s.ln(), 1.0),
        FreeType::II => (1.0 / alpha, 0.0, 0.0),
        FreeType::III => (-1.0 / alpha, 0.0, 0.0),
    };
    Ok(StabilityConstants {
        s,
        a_of_s: s.powf(theta),
        b_of_s: b,
        theta,
        c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub a: f64,
    pub b: f64,
    pub sup_distance: f64,
    /// Whether `α(G) > −∞`, a necessary condition for free max-stability.
    pub bounded_below: bool,
}

/// Grid sup distance between `G^{⊡k}(a·x + b)` and `G(x)`.
pub fn stability_distance(g: &Cdf, k: u64, a: f64, b: f64, grid: &[f64]) -> Result<f64> {
    let gk = free_max_iterate(g, k)?;
    Ok(sup_distance(&rescale(&gk, a, b)?, g, grid))
}

fn quartiles(f: &Cdf) -> Result<(f64, f64)> {
    let (q1, q3) = (f.quantile(0.25)?, f.quantile(0.75)?);
    if !(q1.is_finite() && q3.is_finite()) {
        return Err(Error::Numerical(format!("non-finite quartiles ({q1}, {q3})")));
    }
    Ok((q1, q3))
}

fn fit_by_quartiles(g: &Cdf, k: u64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::invalid("k", "iterate count must be at least 2"));
    }
    let (q1, q3) = quartiles(g)?;
    if q1 >= q3 {
        return Err(Error::Degenerate(format!(
            "quartiles coincide at {q1}; stability is vacuous"
        )));
    }
    let gk = free_max_iterate(g, k)?;
    let (h1, h3) = quartiles(&gk)?;
    let a = (h3 - h1) / (q3 - q1);
    Ok((a, h1 - a * q1))
}

/// Fits `(a_k, b_k)` by matching the quartiles of `G^{⊡k}` and `G`, then
/// checks the affine identity on the grid.
pub fn verify_max_stable(g: &Cdf, k: u64, tol: f64, grid: &GridSpec) -> Result<StabilityVerdict> {
    let (a, b) = fit_by_quartiles(g, k)?;
    let bounded_below = g.lower() > f64::NEG_INFINITY;
    let points = grid.build(&[g])?;
    let sup_distance = if a > 0.0 && a.is_finite() {
        stability_distance(g, k, a, b, &points)?
    } else {
        1.0
    };
    Ok(StabilityVerdict {
        stable: bounded_below && sup_distance <= tol,
        a,
        b,
        sup_distance,
        bounded_below,
    })
}

/// Minimum over affine maps of the stability distance, found by a simplex
/// search over `(ln a, b)` started from the quartile fit.
pub fn minimized_stability_distance(g: &Cdf, k: u64, grid: &GridSpec) -> Result<StabilityVerdict> {
    let (a0, b0) = fit_by_quartiles(g, k)?;
    let (q1, q3) = quartiles(g)?;
    let points = grid.build(&[g])?;
    let gk = free_max_iterate(g, k)?;
    let objective = |p: [f64; 2]| {
        let a = p[0].exp();
        if !(a > 0.0 && a.is_finite()) {
            return f64::INFINITY;
        }
        match rescale(&gk, a, p[1]) {
            Ok(r) => sup_distance(&r, g, &points),
            Err(_) => f64::INFINITY,
        }
    };
    let spread = q3 - q1;
    let mut best = ([a0.ln(), b0], objective([a0.ln(), b0]));
    for step in [0.2, 0.05] {
        let (p, v) = nelder_mead_2d(&objective, best.0, [step, step * spread], 400);
        if v < best.1 {
            best = (p, v);
        }
    }
    let bounded_below = g.lower() > f64::NEG_INFINITY;
    Ok(StabilityVerdict {
        stable: false,
        a: best.0[0].exp(),
        b: best.0[1],
        sup_distance: best.1,
        bounded_below,
    })
}

/// `make_law(GPD γ) = rescale(make_law(kind, alpha), a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdCorrespondence {
    pub kind: FreeType,
    pub alpha: Option<f64>,
    pub a: f64,
    pub b: f64,
}

pub fn gpd_correspondence(gamma: f64) -> GpdCorrespondence {
    if gamma > 0.0 {
        GpdCorrespondence {
            kind: FreeType::II,
            alpha: Some(1.0 / gamma),
            a: gamma,
            b: 1.0,
        }
    } else if gamma < 0.0 {
        GpdCorrespondence {
            kind: FreeType::III,
            alpha: Some(-1.0 / gamma),
            a: -gamma,
            b: -1.0,
        }
    } else {
        GpdCorrespondence {
            kind: FreeType::I,
            alpha: None,
            a: 1.0,
            b: 0.0,
        }
    }
}

#[derive(Debug)]
struct FcMap {
    inner: Cdf,
    c: f64,
    lower: OnceLock<f64>,
}

impl FcMap {
    fn log_of(&self, f: f64, tail: f64) -> f64 {
        if tail < 0.5 {
            (-tail).ln_1p()
        } else {
            f.ln()
        }
    }

    fn tail_from(&self, f: f64, tail: f64) -> f64 {
        if f <= 0.0 {
            1.0
        } else {
            (-self.c * self.log_of(f, tail)).min(1.0)
        }
    }
}

impl Distribution for FcMap {
    fn cdf(&self, x: f64) -> f64 {
        let f = self.inner.cdf(x);
        if f <= 0.0 {
            0.0
        } else {
            (1.0 + self.c * self.log_of(f, self.inner.tail(x))).max(0.0)
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let f = self.inner.cdf_left(x);
        if f <= 0.0 {
            0.0
        } else {
            (1.0 + self.c * f.ln()).max(0.0)
        }
    }

    fn tail(&self, x: f64) -> f64 {
        self.tail_from(self.inner.cdf(x), self.inner.tail(x))
    }

    fn lower(&self) -> f64 {
        *self
            .lower
            .get_or_init(|| self.inner.tail_inverse(-(-1.0 / self.c).exp_m1(), true))
    }

    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    fn gap_tail(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let t = self.inner.gap_tail(h);
        self.tail_from(1.0 - t, t)
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// `x ↦ (1 + c·ln F(x))₊` with `f_c(0) = 0`. Carries classical products
/// to free max-convolutions: `f_c(F·G) = f_c(F) ⊡ f_c(G)`.
pub fn f_c_map(f: &Cdf, c: f64) -> Result<Cdf> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("c", format!("{c} must be positive")));
    }
    Ok(Cdf::new(FcMap {
        inner: f.clone(),
        c,
        lower: OnceLock::new(),
    }))
}
