use std::f64::consts::PI;

use crate::cdf::{Cdf, CdfKind, Distribution};
use crate::error::{Error, Result};
use crate::laws::{make_law, LawKind, LawSpec};
use crate::numeric::{first_true, integrate};

const QUAD_TOL: f64 = 1e-13;

/// Free Poisson (Marchenko–Pastur) law with rate `a` and jump size 1: an
/// atom `(1 − a)₊` at 0 and density `√((λ₊ − x)(x − λ₋)) / (2πx)` on
/// `[λ₋, λ₊]`, `λ± = (1 ± √a)²`.
#[derive(Debug, Clone)]
pub struct MpLaw {
    a: f64,
    lambda_minus: f64,
    lambda_plus: f64,
}

impl MpLaw {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("a", format!("rate {a} must be positive")));
        }
        let s = a.sqrt();
        Ok(MpLaw {
            a,
            lambda_minus: (1.0 - s) * (1.0 - s),
            lambda_plus: (1.0 + s) * (1.0 + s),
        })
    }

    pub fn rate(&self) -> f64 {
        self.a
    }

    pub fn atom(&self) -> f64 {
        (1.0 - self.a).max(0.0)
    }

    /// `(λ₋, λ₊)`.
    pub fn bulk(&self) -> (f64, f64) {
        (self.lambda_minus, self.lambda_plus)
    }

    // With x = λ₋ + 2r·sin²(φ/2), r = (λ₊ − λ₋)/2 = 2√a, the density
    // element becomes r²·sin²φ / (2π·x) dφ on [0, π], free of endpoint
    // singularities.
    fn integrand(&self, phi: f64) -> f64 {
        let r = 2.0 * self.a.sqrt();
        let half = (0.5 * phi).sin();
        let x = self.lambda_minus + 2.0 * r * half * half;
        let s = phi.sin();
        r * r * s * s / (2.0 * PI * x)
    }

    fn angle(&self, x: f64) -> f64 {
        let r = 2.0 * self.a.sqrt();
        let u = ((x - self.lambda_minus) / (2.0 * r)).clamp(0.0, 1.0);
        2.0 * u.sqrt().asin()
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        integrate(|p| self.integrand(p), lo, hi, QUAD_TOL, 0.0).value
    }

    /// Mass of the absolutely continuous part, by quadrature.
    pub fn continuous_mass(&self) -> f64 {
        self.integral(0.0, PI)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 || (x < self.lambda_minus && self.atom() == 0.0) {
            0.0
        } else if x <= self.lambda_minus {
            self.atom()
        } else if x >= self.lambda_plus {
            1.0
        } else {
            (self.atom() + self.integral(0.0, self.angle(x))).min(1.0)
        }
    }

    pub fn cdf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.cdf(x)
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x < 0.0 || (x < self.lambda_minus && self.atom() == 0.0) {
            1.0
        } else if x <= self.lambda_minus {
            1.0 - self.atom()
        } else if x >= self.lambda_plus {
            0.0
        } else {
            self.integral(self.angle(x), PI).min(1.0)
        }
    }

    pub fn lower(&self) -> f64 {
        if self.atom() > 0.0 {
            0.0
        } else {
            self.lambda_minus
        }
    }

    pub fn upper(&self) -> f64 {
        self.lambda_plus
    }

    /// Interior tail inverse for `q ∈ (0, 1)`.
    pub fn tail_inverse(&self, q: f64, strict: bool) -> f64 {
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
}

/// Law of the nonzero part of a free Poisson spectrum: the absolutely
/// continuous part of [`MpLaw`] renormalized to mass 1.
#[derive(Debug, Clone)]
pub struct MpBulk {
    law: MpLaw,
    mass: f64,
}

impl MpBulk {
    pub fn new(a: f64) -> Result<Self> {
        let law = MpLaw::new(a)?;
        let mass = 1.0 - law.atom();
        Ok(MpBulk { law, mass })
    }
}

impl Distribution for MpBulk {
    fn cdf(&self, x: f64) -> f64 {
        if x <= self.law.lambda_minus {
            0.0
        } else {
            1.0 - self.tail(x)
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x <= self.law.lambda_minus {
            1.0
        } else {
            (self.law.tail(x) / self.mass).min(1.0)
        }
    }

    fn lower(&self) -> f64 {
        self.law.lambda_minus
    }

    fn upper(&self) -> f64 {
        self.law.lambda_plus
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Parametric
    }
}

pub fn mp_cdf(a: f64) -> Result<Cdf> {
    make_law(&LawSpec::with_shape(LawKind::MarchenkoPastur, a))
}

/// Free Poisson law conditioned on the spectrum being nonzero.
pub fn mp_bulk_cdf(a: f64) -> Result<Cdf> {
    Ok(Cdf::new(MpBulk::new(a)?))
}

/// Law with tail `min((1 − t)·m, 1)` on `[0, 1)`.
pub fn triangular_law_cdf(m: f64) -> Result<Cdf> {
    make_law(&LawSpec::with_shape(LawKind::Triangular, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_atom() {
        let l = MpLaw::new(0.25).unwrap();
        assert_eq!(l.bulk(), (0.25, 2.25));
        assert_eq!(l.atom(), 0.75);
        let f = mp_cdf(0.25).unwrap();
        assert_eq!(f.cdf(0.0), 0.75);
        assert_eq!(f.cdf_left(0.0), 0.0);
        assert_eq!(f.cdf(0.2), 0.75);
        assert_eq!((f.lower(), f.upper()), (0.0, 2.25));
        let f = mp_cdf(1.0).unwrap();
        assert_eq!(f.cdf(0.0), 0.0);
        assert_eq!((f.lower(), f.upper()), (0.0, 4.0));
        let f = mp_cdf(4.0).unwrap();
        assert_eq!((f.lower(), f.upper()), (1.0, 9.0));
    }

    #[test]
    fn bulk_is_normalized() {
        let b = mp_bulk_cdf(0.5).unwrap();
        let (lo, hi) = MpLaw::new(0.5).unwrap().bulk();
        assert_eq!(b.cdf(lo), 0.0);
        assert_eq!(b.cdf(hi), 1.0);
        let mid = b.cdf(0.5 * (lo + hi));
        assert!(mid > 0.3 && mid < 0.9);
    }

    #[test]
    fn bad_rate() {
        assert!(MpLaw::new(0.0).is_err());
        assert!(triangular_law_cdf(-1.0).is_err());
    }
}
