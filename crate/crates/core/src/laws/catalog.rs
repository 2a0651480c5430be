//! Reference laws used for domain-of-attraction and homomorphism checks.

use std::f64::consts::PI;

use super::{make_law, LawKind, LawSpec};
use crate::cdf::{Cdf, CdfKind, Distribution};

/// Standard Cauchy law, tail `~ 1/(πx)`.
#[derive(Debug, Clone, Copy)]
pub struct Cauchy;

impl Distribution for Cauchy {
    fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            (-1.0 / x).atan() / PI
        } else {
            1.0 - self.tail(x)
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x > 0.0 {
            (1.0 / x).atan() / PI
        } else {
            0.5 - x.atan() / PI
        }
    }

    fn lower(&self) -> f64 {
        f64::NEG_INFINITY
    }

    fn upper(&self) -> f64 {
        f64::INFINITY
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Parametric
    }
}

/// Pareto tail perturbed by a slowly varying factor:
/// `F̄(x) = x^{−2} / ln(e·x)` for `x ≥ 1`.
#[derive(Debug, Clone, Copy)]
pub struct LogPerturbedPareto;

impl Distribution for LogPerturbedPareto {
    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.tail(x)
    }

    fn tail(&self, x: f64) -> f64 {
        if x.is_nan() {
            f64::NAN
        } else if x < 1.0 {
            1.0
        } else if x == f64::INFINITY {
            0.0
        } else {
            1.0 / (x * x * (1.0 + x.ln()))
        }
    }

    fn lower(&self) -> f64 {
        1.0
    }

    fn upper(&self) -> f64 {
        f64::INFINITY
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Parametric
    }
}

/// Ten continuous laws with varied support and tail behaviour, named.
pub fn catalog() -> Vec<(&'static str, Cdf)> {
    let law = |kind, shape| make_law(&LawSpec::with_shape(kind, shape)).unwrap();
    vec![
        ("gumbel", law(LawKind::ClassicalGumbel, 1.0)),
        ("frechet_0.5", law(LawKind::ClassicalFrechet, 0.5)),
        ("frechet_2", law(LawKind::ClassicalFrechet, 2.0)),
        ("weibull_1", law(LawKind::ClassicalWeibull, 1.0)),
        ("weibull_3", law(LawKind::ClassicalWeibull, 3.0)),
        ("normal", law(LawKind::StdNormal, 1.0)),
        ("uniform", law(LawKind::Uniform, 1.0)),
        ("exponential", law(LawKind::FreeTypeI, 1.0)),
        ("cauchy", Cdf::new(Cauchy)),
        ("log_pareto", Cdf::new(LogPerturbedPareto)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_symmetry() {
        let c = Cdf::new(Cauchy);
        assert!((c.cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((c.cdf(1.0) - 0.75).abs() < 1e-15);
        assert!((c.cdf(-1.0) - 0.25).abs() < 1e-15);
        assert!((c.tail(1e8) * 1e8 * PI - 1.0).abs() < 1e-12);
        assert_eq!(c.cdf(f64::NEG_INFINITY), 0.0);
        assert_eq!(c.cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn log_pareto_values() {
        let f = Cdf::new(LogPerturbedPareto);
        assert_eq!(f.tail(1.0), 1.0);
        assert!((f.tail(std::f64::consts::E) - (-2f64).exp() / 2.0).abs() < 1e-16);
        let u = f.tail_inverse(1e-4, true);
        assert!((f.tail(u) - 1e-4).abs() < 1e-15);
    }
}
