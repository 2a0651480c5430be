//! Pointwise operations on distribution functions. Each returns a lazy
//! derived distribution; support endpoints that need a search are computed on
//! first use and cached.

use std::sync::OnceLock;

use super::{tail_inverse_edge, Cdf, CdfKind, Distribution};
use crate::error::{Error, Result};
use crate::numeric::first_true;

/// Tail of `f` at `omega − h`, going through `gap_tail` when `omega` is
/// exactly the upper endpoint of `f`.
fn tail_below(f: &Cdf, omega: f64, h: f64) -> f64 {
    if f.upper() == omega {
        f.gap_tail(h)
    } else {
        f.tail(omega - h)
    }
}

#[derive(Debug)]
struct FreeMax {
    f: Cdf,
    g: Cdf,
    lower: OnceLock<f64>,
}

impl Distribution for FreeMax {
    fn cdf(&self, x: f64) -> f64 {
        (self.f.cdf(x) + self.g.cdf(x) - 1.0).max(0.0)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        (self.f.cdf_left(x) + self.g.cdf_left(x) - 1.0).max(0.0)
    }

    fn tail(&self, x: f64) -> f64 {
        (self.f.tail(x) + self.g.tail(x)).min(1.0)
    }

    fn lower(&self) -> f64 {
        *self.lower.get_or_init(|| {
            let lo = self.f.lower().max(self.g.lower());
            first_true(lo, self.upper(), |x| self.tail(x) < 1.0).unwrap_or(self.upper())
        })
    }

    fn upper(&self) -> f64 {
        self.f.upper().max(self.g.upper())
    }

    fn gap_tail(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let w = self.upper();
        (tail_below(&self.f, w, h) + tail_below(&self.g, w, h)).min(1.0)
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// Free max-convolution `H = (F + G − 1)₊`, the law of `a ∨ b` for free
/// self-adjoint `a`, `b`.
pub fn free_max_conv(f: &Cdf, g: &Cdf) -> Cdf {
    Cdf::new(FreeMax {
        f: f.clone(),
        g: g.clone(),
        lower: OnceLock::new(),
    })
}

#[derive(Debug)]
struct FreeMin {
    f: Cdf,
    g: Cdf,
    upper: OnceLock<f64>,
}

impl Distribution for FreeMin {
    fn cdf(&self, x: f64) -> f64 {
        (self.f.cdf(x) + self.g.cdf(x)).min(1.0)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        (self.f.cdf_left(x) + self.g.cdf_left(x)).min(1.0)
    }

    fn tail(&self, x: f64) -> f64 {
        (self.f.tail(x) + self.g.tail(x) - 1.0).max(0.0)
    }

    fn lower(&self) -> f64 {
        self.f.lower().min(self.g.lower())
    }

    fn upper(&self) -> f64 {
        *self.upper.get_or_init(|| {
            let hi = self.f.upper().min(self.g.upper());
            first_true(self.lower(), hi, |x| self.cdf(x) >= 1.0).unwrap_or(hi)
        })
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// Free min-convolution `K = min(F + G, 1)`.
pub fn free_min_conv(f: &Cdf, g: &Cdf) -> Cdf {
    Cdf::new(FreeMin {
        f: f.clone(),
        g: g.clone(),
        upper: OnceLock::new(),
    })
}

#[derive(Debug)]
struct ClassicalMax {
    f: Cdf,
    g: Cdf,
}

impl Distribution for ClassicalMax {
    fn cdf(&self, x: f64) -> f64 {
        self.f.cdf(x) * self.g.cdf(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.f.cdf_left(x) * self.g.cdf_left(x)
    }

    fn tail(&self, x: f64) -> f64 {
        let (a, b) = (self.f.tail(x), self.g.tail(x));
        a + b - a * b
    }

    fn lower(&self) -> f64 {
        self.f.lower().max(self.g.lower())
    }

    fn upper(&self) -> f64 {
        self.f.upper().max(self.g.upper())
    }

    fn gap_tail(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        let w = self.upper();
        let (a, b) = (tail_below(&self.f, w, h), tail_below(&self.g, w, h));
        a + b - a * b
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// Classical max-convolution: the product `F·G`.
pub fn classical_max_conv(f: &Cdf, g: &Cdf) -> Cdf {
    Cdf::new(ClassicalMax {
        f: f.clone(),
        g: g.clone(),
    })
}

#[derive(Debug)]
struct FreePower {
    inner: Cdf,
    s: f64,
}

impl Distribution for FreePower {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        1.0 - (self.s * (1.0 - self.inner.cdf_left(x))).min(1.0)
    }

    fn tail(&self, x: f64) -> f64 {
        (self.s * self.inner.tail(x)).min(1.0)
    }

    fn lower(&self) -> f64 {
        self.inner.tail_inverse(1.0 / self.s, true)
    }

    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    fn gap_tail(&self, h: f64) -> f64 {
        (self.s * self.inner.gap_tail(h)).min(1.0)
    }

    fn gap_inverse(&self, q: f64) -> f64 {
        self.inner.gap_inverse(q / self.s)
    }

    fn tail_inverse(&self, q: f64, strict: bool) -> f64 {
        match tail_inverse_edge(self.lower(), q, strict) {
            Some(edge) => edge,
            None => self.inner.tail_inverse(q / self.s, strict),
        }
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// `F^{⊡n} = (nF − (n − 1))₊`, the law of the free maximum of `n` free
/// copies.
pub fn free_max_iterate(f: &Cdf, n: u64) -> Result<Cdf> {
    if n < 1 {
        return Err(Error::invalid("n", "iterate count must be at least 1"));
    }
    free_max_power(f, n as f64)
}

/// Real-index free max-power: the CDF with tail `min(s·F̄, 1)`.
pub fn free_max_power(f: &Cdf, s: f64) -> Result<Cdf> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::invalid("s", format!("{s} is not a finite real ≥ 1")));
    }
    Ok(Cdf::new(FreePower {
        inner: f.clone(),
        s,
    }))
}

#[derive(Debug)]
struct Rescale {
    inner: Cdf,
    a: f64,
    b: f64,
    // `b` coincides with the inner upper endpoint: evaluate tails through
    // the gap representation, which avoids cancellation in `a·x + b`.
    anchored: bool,
}

impl Distribution for Rescale {
    fn cdf(&self, x: f64) -> f64 {
        if self.anchored {
            1.0 - self.tail(x)
        } else {
            self.inner.cdf(self.a.mul_add(x, self.b))
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.inner.cdf_left(self.a.mul_add(x, self.b))
    }

    fn tail(&self, x: f64) -> f64 {
        if self.anchored {
            if x >= 0.0 {
                0.0
            } else {
                self.inner.gap_tail(-self.a * x)
            }
        } else {
            self.inner.tail(self.a.mul_add(x, self.b))
        }
    }

    fn lower(&self) -> f64 {
        (self.inner.lower() - self.b) / self.a
    }

    fn upper(&self) -> f64 {
        if self.anchored {
            0.0
        } else {
            (self.inner.upper() - self.b) / self.a
        }
    }

    fn gap_tail(&self, h: f64) -> f64 {
        self.inner.gap_tail(self.a * h)
    }

    fn gap_inverse(&self, q: f64) -> f64 {
        self.inner.gap_inverse(q) / self.a
    }

    fn tail_inverse(&self, q: f64, strict: bool) -> f64 {
        match tail_inverse_edge(self.lower(), q, strict) {
            Some(edge) => edge,
            None => (self.inner.tail_inverse(q, strict) - self.b) / self.a,
        }
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// `x ↦ F(a·x + b)`.
pub fn rescale(f: &Cdf, a: f64, b: f64) -> Result<Cdf> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("a", format!("scale {a} must be positive and finite")));
    }
    if !b.is_finite() {
        return Err(Error::invalid("b", format!("location {b} must be finite")));
    }
    Ok(Cdf::new(Rescale {
        inner: f.clone(),
        a,
        b,
        anchored: f.upper() == b,
    }))
}

#[derive(Debug)]
struct Reflect {
    inner: Cdf,
}

impl Distribution for Reflect {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.inner.cdf_left(-x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        1.0 - self.inner.cdf(-x)
    }

    fn tail(&self, x: f64) -> f64 {
        self.inner.cdf_left(-x)
    }

    fn lower(&self) -> f64 {
        -self.inner.upper()
    }

    fn upper(&self) -> f64 {
        -self.inner.lower()
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// Law of `−X`: `x ↦ 1 − F((−x)⁻)`.
pub fn reflect(f: &Cdf) -> Cdf {
    Cdf::new(Reflect { inner: f.clone() })
}

#[derive(Debug)]
struct Exceedance {
    inner: Cdf,
    u: f64,
    tail_u: f64,
    lower: OnceLock<f64>,
}

impl Distribution for Exceedance {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            1.0 - (1.0 - self.inner.cdf_left(self.u + x)) / self.tail_u
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            (self.inner.tail(self.u + x) / self.tail_u).min(1.0)
        }
    }

    fn lower(&self) -> f64 {
        *self.lower.get_or_init(|| {
            (self.inner.tail_inverse(self.tail_u, true) - self.u).max(0.0)
        })
    }

    fn upper(&self) -> f64 {
        self.inner.upper() - self.u
    }

    fn gap_tail(&self, h: f64) -> f64 {
        (self.inner.gap_tail(h) / self.tail_u).min(1.0)
    }

    fn gap_inverse(&self, q: f64) -> f64 {
        self.inner.gap_inverse(q * self.tail_u)
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

/// Exceedance law `F^{[u]}(x) = P(X ≤ u + x | X > u)`.
pub fn exceedance_cdf(f: &Cdf, u: f64) -> Result<Cdf> {
    if u.is_nan() || u >= f.upper() {
        return Err(Error::invalid(
            "u",
            format!("threshold {u} is not below the upper endpoint {}", f.upper()),
        ));
    }
    let tail_u = f.tail(u);
    if !(tail_u > 0.0) {
        return Err(Error::EmptyConditioning { threshold: u });
    }
    Ok(Cdf::new(Exceedance {
        inner: f.clone(),
        u,
        tail_u,
        lower: OnceLock::new(),
    }))
}

/// `α(F^{⊡n}) = sup{x : F(x) ≤ 1 − 1/n}`, finite for every `n ≥ 2`.
pub fn lower_endpoint_iterate(f: &Cdf, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("n", "iterate count must be at least 2"));
    }
    Ok(f.tail_inverse(1.0 / n as f64, true))
}

/// `u_n = inf{t : F̄(t) < 1/n}`.
pub fn threshold_un(f: &Cdf, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("n", "n must be at least 1"));
    }
    Ok(f.tail_inverse(1.0 / n as f64, true))
}

/// `μ ⊡ ν = χ_{(t,∞)}·(μ + ν) + (1 − (μ + ν)((t,∞)))·δ_t`.
#[derive(Debug, Clone)]
pub struct MeasureDecomposition {
    pub threshold: f64,
    pub atom_mass: f64,
    /// `χ_{(t,∞)}·(μ + ν)` normalized to a probability law; `None` when that
    /// restriction has zero mass.
    pub restricted_tail_measure: Option<Cdf>,
    /// Unnormalized mass of the restriction, `1 − atom_mass`.
    pub restricted_mass: f64,
}

#[derive(Debug)]
struct RestrictedSum {
    f: Cdf,
    g: Cdf,
    t: f64,
    mass: f64,
}

impl Distribution for RestrictedSum {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    fn tail(&self, x: f64) -> f64 {
        if x <= self.t {
            1.0
        } else {
            ((self.f.tail(x) + self.g.tail(x)) / self.mass).min(1.0)
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.t {
            0.0
        } else {
            let tail_left = (1.0 - self.f.cdf_left(x)) + (1.0 - self.g.cdf_left(x));
            1.0 - (tail_left / self.mass).min(1.0)
        }
    }

    fn lower(&self) -> f64 {
        self.t
    }

    fn upper(&self) -> f64 {
        self.f.upper().max(self.g.upper())
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

#[derive(Debug)]
struct Reassembled {
    t: f64,
    atom: f64,
    mass: f64,
    restricted: Option<Cdf>,
}

impl Distribution for Reassembled {
    fn cdf(&self, x: f64) -> f64 {
        if x < self.t {
            return 0.0;
        }
        match &self.restricted {
            Some(r) => self.atom + self.mass * r.cdf(x),
            None => 1.0,
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x <= self.t {
            0.0
        } else {
            self.cdf_left_above(x)
        }
    }

    fn lower(&self) -> f64 {
        self.t
    }

    fn upper(&self) -> f64 {
        self.restricted.as_ref().map_or(self.t, |r| r.upper())
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Derived
    }
}

impl Reassembled {
    fn cdf_left_above(&self, x: f64) -> f64 {
        match &self.restricted {
            Some(r) => self.atom + self.mass * r.cdf_left(x),
            None => 1.0,
        }
    }
}

impl MeasureDecomposition {
    /// CDF of `atom_mass·δ_t + restricted_mass·restricted_tail_measure`.
    pub fn reassemble(&self) -> Cdf {
        Cdf::new(Reassembled {
            t: self.threshold,
            atom: self.atom_mass,
            mass: self.restricted_mass,
            restricted: self.restricted_tail_measure.clone(),
        })
    }
}

/// Splits `μ ⊡ ν` into an atom at `t = inf{x : (μ + ν)((x,∞)) ≤ 1}` and the
/// restriction of `μ + ν` to `(t, ∞)`.
pub fn atom_decomposition_max(f: &Cdf, g: &Cdf) -> MeasureDecomposition {
    let lo = f.lower().min(g.lower());
    let hi = f.upper().max(g.upper());
    let sum_tail = |x: f64| f.tail(x) + g.tail(x);
    let t = first_true(lo, hi, |x| sum_tail(x) <= 1.0).unwrap_or(hi);
    let mass = sum_tail(t).min(1.0);
    let atom_mass = 1.0 - mass;
    let restricted_tail_measure = (mass > 0.0).then(|| {
        Cdf::new(RestrictedSum {
            f: f.clone(),
            g: g.clone(),
            t,
            mass,
        })
    });
    MeasureDecomposition {
        threshold: t,
        atom_mass,
        restricted_tail_measure,
        restricted_mass: mass,
    }
}
