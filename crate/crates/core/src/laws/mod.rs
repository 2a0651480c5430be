//! Parametric laws: the three free max-stable types, generalized Pareto,
//! the classical extreme-value laws and a few reference distributions.

pub mod catalog;
mod stable;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::cdf::{tail_inverse_edge, Cdf, CdfKind, Distribution};
use crate::error::{Error, Result};
use crate::numeric::first_true;
use crate::poisson::MpLaw;

pub use stable::{
    f_c_map, gpd_correspondence, minimized_stability_distance, stability_constants,
    stability_distance, verify_max_stable, FreeType, GpdCorrespondence, StabilityConstants,
    StabilityVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawKind {
    /// `(1 − e^{−x})₊`.
    FreeTypeI,
    /// Pareto `(1 − x^{−α})₊` on `[1, ∞)`.
    FreeTypeII,
    /// Beta law `1 − |x|^α` on `[−1, 0]`.
    FreeTypeIII,
    /// `G_γ(x) = 1 − (1 + γx)^{−1/γ}`.
    GeneralizedPareto,
    ClassicalGumbel,
    ClassicalFrechet,
    ClassicalWeibull,
    Uniform,
    StdNormal,
    /// Free Poisson law with rate `shape`.
    MarchenkoPastur,
    /// Triangular extremal-process law with mass `shape`.
    Triangular,
}

/// Parametric law `F((x − location)/scale)` of the given kind and shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawSpec {
    pub kind: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(default)]
    pub location: f64,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl LawSpec {
    pub fn new(kind: LawKind) -> Self {
        LawSpec {
            kind,
            shape: None,
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn with_shape(kind: LawKind, shape: f64) -> Self {
        LawSpec {
            shape: Some(shape),
            ..LawSpec::new(kind)
        }
    }

    pub fn located(mut self, location: f64, scale: f64) -> Self {
        self.location = location;
        self.scale = scale;
        self
    }

    /// Shape parameter with the kind's default filled in.
    pub fn shape_or_default(&self) -> f64 {
        self.shape.unwrap_or(match self.kind {
            LawKind::GeneralizedPareto => 0.0,
            _ => 1.0,
        })
    }
}

/// Smallest float `z` with `1 + γz ≤ 0` in exact arithmetic, for `γ < 0`.
fn gpd_endpoint(g: f64) -> f64 {
    let mut z = -1.0 / g;
    while g.mul_add(z, 1.0) > 0.0 {
        z = z.next_up();
    }
    while g.mul_add(z.next_down(), 1.0) <= 0.0 {
        z = z.next_down();
    }
    z
}

#[derive(Debug, Clone)]
enum Base {
    Exponential,
    Pareto(f64),
    Beta(f64),
    Gpd(f64),
    Gumbel,
    Frechet(f64),
    Weibull(f64),
    Uniform,
    Normal,
    Triangular(f64),
    FreePoisson(MpLaw),
}

/// Closed-form law with location and scale.
#[derive(Debug, Clone)]
pub struct Law {
    base: Base,
    location: f64,
    scale: f64,
}

pub fn make_law(spec: &LawSpec) -> Result<Cdf> {
    Ok(Cdf::new(Law::new(spec)?))
}

impl Law {
    pub fn new(spec: &LawSpec) -> Result<Self> {
        if !(spec.scale > 0.0) || !spec.scale.is_finite() {
            return Err(Error::invalid("scale", format!("{} must be positive", spec.scale)));
        }
        if !spec.location.is_finite() {
            return Err(Error::invalid("location", format!("{} must be finite", spec.location)));
        }
        let shape = spec.shape_or_default();
        let positive = |s: f64| {
            if s > 0.0 && s.is_finite() {
                Ok(s)
            } else {
                Err(Error::invalid("shape", format!("{s} must be positive for {:?}", spec.kind)))
            }
        };
        let base = match spec.kind {
            LawKind::FreeTypeI => Base::Exponential,
            LawKind::FreeTypeII => Base::Pareto(positive(shape)?),
            LawKind::FreeTypeIII => Base::Beta(positive(shape)?),
            LawKind::GeneralizedPareto => {
                if !shape.is_finite() {
                    return Err(Error::invalid("shape", format!("γ = {shape} must be finite")));
                }
                Base::Gpd(shape)
            }
            LawKind::ClassicalGumbel => Base::Gumbel,
            LawKind::ClassicalFrechet => Base::Frechet(positive(shape)?),
            LawKind::ClassicalWeibull => Base::Weibull(positive(shape)?),
            LawKind::Uniform => Base::Uniform,
            LawKind::StdNormal => Base::Normal,
            LawKind::Triangular => Base::Triangular(positive(shape)?),
            LawKind::MarchenkoPastur => Base::FreePoisson(MpLaw::new(positive(shape)?)?),
        };
        Ok(Law {
            base,
            location: spec.location,
            scale: spec.scale,
        })
    }

    fn z(&self, x: f64) -> f64 {
        if self.location == 0.0 && self.scale == 1.0 {
            x
        } else {
            (x - self.location) / self.scale
        }
    }

    fn x(&self, z: f64) -> f64 {
        self.location + self.scale * z
    }

    fn lower0(&self) -> f64 {
        match &self.base {
            Base::Exponential | Base::Gpd(_) | Base::Frechet(_) | Base::Uniform => 0.0,
            Base::Pareto(_) => 1.0,
            Base::Beta(_) => -1.0,
            Base::Gumbel | Base::Weibull(_) | Base::Normal => f64::NEG_INFINITY,
            Base::Triangular(m) => (1.0 - 1.0 / m).max(0.0),
            Base::FreePoisson(mp) => mp.lower(),
        }
    }

    fn upper0(&self) -> f64 {
        match &self.base {
            Base::Beta(_) | Base::Weibull(_) => 0.0,
            Base::Uniform | Base::Triangular(_) => 1.0,
            Base::Gpd(g) if *g < 0.0 => gpd_endpoint(*g),
            Base::FreePoisson(mp) => mp.upper(),
            _ => f64::INFINITY,
        }
    }

    /// `ln F̄(z)` for the GPD on the interior of its support.
    fn gpd_log_tail(g: f64, z: f64) -> f64 {
        if g == 0.0 {
            return -z;
        }
        // Near a finite endpoint 1 + γz cancels; the fused form rounds once.
        let t = g.mul_add(z, 1.0);
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else if t < 0.5 {
            -t.ln() / g
        } else {
            -(g * z).ln_1p() / g
        }
    }

    fn cdf0(&self, z: f64) -> f64 {
        if z.is_nan() {
            return f64::NAN;
        }
        match &self.base {
            Base::Exponential => {
                if z < 0.0 {
                    0.0
                } else {
                    -(-z).exp_m1()
                }
            }
            Base::Gpd(g) => {
                if z < 0.0 {
                    0.0
                } else if z >= self.upper0() {
                    1.0
                } else {
                    -Self::gpd_log_tail(*g, z).exp_m1()
                }
            }
            Base::Gumbel => (-(-z).exp()).exp(),
            Base::Frechet(a) => {
                if z <= 0.0 {
                    0.0
                } else {
                    (-z.powf(-a)).exp()
                }
            }
            Base::Weibull(a) => {
                if z >= 0.0 {
                    1.0
                } else {
                    (-(-z).powf(*a)).exp()
                }
            }
            Base::Uniform => z.clamp(0.0, 1.0),
            Base::Normal => 0.5 * erfc(-z / std::f64::consts::SQRT_2),
            Base::FreePoisson(mp) => mp.cdf(z),
            _ => 1.0 - self.tail0(z),
        }
    }

    fn tail0(&self, z: f64) -> f64 {
        if z.is_nan() {
            return f64::NAN;
        }
        match &self.base {
            Base::Exponential => {
                if z < 0.0 {
                    1.0
                } else {
                    (-z).exp()
                }
            }
            Base::Pareto(a) => {
                if z < 1.0 {
                    1.0
                } else {
                    z.powf(-a)
                }
            }
            Base::Beta(a) => {
                if z < -1.0 {
                    1.0
                } else if z >= 0.0 {
                    0.0
                } else {
                    (-z).powf(*a)
                }
            }
            Base::Gpd(g) => {
                if z < 0.0 {
                    1.0
                } else if z >= self.upper0() {
                    0.0
                } else {
                    Self::gpd_log_tail(*g, z).exp()
                }
            }
            Base::Gumbel => -(-(-z).exp()).exp_m1(),
            Base::Frechet(a) => {
                if z <= 0.0 {
                    1.0
                } else {
                    -(-z.powf(-a)).exp_m1()
                }
            }
            Base::Weibull(a) => {
                if z >= 0.0 {
                    0.0
                } else {
                    -(-(-z).powf(*a)).exp_m1()
                }
            }
            Base::Uniform => (1.0 - z).clamp(0.0, 1.0),
            Base::Normal => 0.5 * erfc(z / std::f64::consts::SQRT_2),
            Base::Triangular(m) => {
                if z < 0.0 {
                    1.0
                } else if z >= 1.0 {
                    0.0
                } else {
                    ((1.0 - z) * m).min(1.0)
                }
            }
            Base::FreePoisson(mp) => mp.tail(z),
        }
    }

    /// `F̄(ω − h)` in standardized units, for laws with a finite upper
    /// endpoint.
    fn gap0(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match &self.base {
            Base::Beta(a) => {
                if h >= 1.0 {
                    1.0
                } else {
                    h.powf(*a)
                }
            }
            Base::Gpd(g) if *g < 0.0 => {
                let w = -1.0 / g;
                if h >= w {
                    1.0
                } else {
                    (-g * h).powf(-1.0 / g)
                }
            }
            Base::Weibull(a) => -(-h.powf(*a)).exp_m1(),
            Base::Uniform => h.min(1.0),
            Base::Triangular(m) => {
                if h > 1.0 {
                    1.0
                } else {
                    (h * m).min(1.0)
                }
            }
            _ => self.tail0(self.upper0() - h),
        }
    }

    /// Interior tail inverse, `q ∈ (0, 1)` (both conventions agree for
    /// these laws except where handled explicitly).
    fn tail_inverse0(&self, q: f64, strict: bool) -> f64 {
        match &self.base {
            Base::Exponential => -q.ln(),
            Base::Pareto(a) => q.powf(-1.0 / a),
            Base::Beta(a) => -q.powf(1.0 / a),
            Base::Gpd(g) => {
                if *g == 0.0 {
                    -q.ln()
                } else {
                    (-g * q.ln()).exp_m1() / g
                }
            }
            Base::Gumbel => -(-(-q).ln_1p()).ln(),
            Base::Frechet(a) => (-(-q).ln_1p()).powf(-1.0 / a),
            Base::Weibull(a) => -(-(-q).ln_1p()).powf(1.0 / a),
            Base::Uniform => 1.0 - q,
            Base::Triangular(m) => (1.0 - q / m).max(0.0),
            Base::Normal => first_true(f64::NEG_INFINITY, f64::INFINITY, |z| {
                self.tail0(z) <= q
            })
            .unwrap_or(f64::INFINITY),
            Base::FreePoisson(mp) => mp.tail_inverse(q, strict),
        }
    }

    fn gap_inverse0(&self, q: f64) -> Option<f64> {
        match &self.base {
            Base::Beta(a) => Some(q.powf(1.0 / a)),
            Base::Gpd(g) if *g < 0.0 => Some(q.powf(-g) / -g),
            Base::Weibull(a) => Some((-(-q).ln_1p()).powf(1.0 / a)),
            Base::Uniform => Some(q),
            Base::Triangular(m) => Some((q / m).min(1.0)),
            _ => None,
        }
    }
}

impl Distribution for Law {
    fn cdf(&self, x: f64) -> f64 {
        self.cdf0(self.z(x))
    }

    fn cdf_left(&self, x: f64) -> f64 {
        let z = self.z(x);
        match &self.base {
            Base::Triangular(_) if z <= 0.0 => 0.0,
            Base::FreePoisson(mp) => mp.cdf_left(z),
            _ => self.cdf0(z),
        }
    }

    fn tail(&self, x: f64) -> f64 {
        self.tail0(self.z(x))
    }

    fn lower(&self) -> f64 {
        self.x(self.lower0())
    }

    fn upper(&self) -> f64 {
        self.x(self.upper0())
    }

    fn gap_tail(&self, h: f64) -> f64 {
        self.gap0(h / self.scale)
    }

    fn gap_inverse(&self, q: f64) -> f64 {
        match self.gap_inverse0(q) {
            Some(h) if q > 0.0 && q < 1.0 => self.scale * h,
            _ => self.upper() - self.tail_inverse(q, true),
        }
    }

    fn tail_inverse(&self, q: f64, strict: bool) -> f64 {
        if let Some(edge) = tail_inverse_edge(self.lower(), q, strict) {
            return edge;
        }
        if q == 0.0 {
            return self.upper();
        }
        self.x(self.tail_inverse0(q, strict))
    }

    fn kind(&self) -> CdfKind {
        CdfKind::Parametric
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(kind: LawKind, shape: f64) -> Cdf {
        make_law(&LawSpec::with_shape(kind, shape)).unwrap()
    }

    #[test]
    fn defining_values() {
        assert_eq!(law(LawKind::FreeTypeII, 2.0).cdf(2.0), 0.75);
        assert_eq!(law(LawKind::FreeTypeIII, 1.0).cdf(-0.25), 0.75);
        assert_eq!(law(LawKind::Uniform, 1.0).cdf(0.3), 0.3);
        let e = law(LawKind::FreeTypeI, 1.0);
        assert!((e.cdf(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-16);
        let n = law(LawKind::StdNormal, 1.0);
        assert!((n.cdf(0.0) - 0.5).abs() < 1e-16);
        assert_eq!(n.cdf(f64::INFINITY), 1.0);
        assert_eq!(n.cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn gpd_support_and_special_cases() {
        let g = law(LawKind::GeneralizedPareto, -1.0);
        assert_eq!((g.lower(), g.upper()), (0.0, 1.0));
        for x in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((g.cdf(x) - x).abs() < 1e-15);
        }
        let g = law(LawKind::GeneralizedPareto, -0.5);
        assert_eq!(g.upper(), 2.0);
        let g = law(LawKind::GeneralizedPareto, 0.5);
        assert_eq!(g.upper(), f64::INFINITY);
        assert!((g.tail(2.0) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn quantiles_invert() {
        for (kind, shape) in [
            (LawKind::FreeTypeI, 1.0),
            (LawKind::FreeTypeII, 2.0),
            (LawKind::FreeTypeIII, 0.5),
            (LawKind::GeneralizedPareto, 0.3),
            (LawKind::GeneralizedPareto, -0.4),
            (LawKind::ClassicalGumbel, 1.0),
            (LawKind::ClassicalFrechet, 1.5),
            (LawKind::ClassicalWeibull, 2.0),
            (LawKind::StdNormal, 1.0),
            (LawKind::Triangular, 0.6),
        ] {
            let f = law(kind, shape);
            for p in [0.01, 0.25, 0.5, 0.9, 0.999] {
                let x = f.quantile(p).unwrap();
                assert!(f.cdf(x) >= p - 1e-12, "{kind:?} p={p} x={x}");
                assert!(f.cdf_left(x) <= p + 1e-12, "{kind:?} p={p} x={x}");
            }
        }
        assert_eq!(law(LawKind::FreeTypeII, 2.0).quantile(0.75).unwrap(), 2.0);
    }

    #[test]
    fn location_scale() {
        let f = make_law(&LawSpec::new(LawKind::Uniform).located(2.0, 4.0)).unwrap();
        assert_eq!((f.lower(), f.upper()), (2.0, 6.0));
        assert_eq!(f.cdf(3.0), 0.25);
        assert_eq!(f.gap_tail(1.0), 0.25);
        assert_eq!(f.gap_inverse(0.25), 1.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        for kind in [
            LawKind::FreeTypeII,
            LawKind::FreeTypeIII,
            LawKind::ClassicalFrechet,
            LawKind::ClassicalWeibull,
            LawKind::Triangular,
            LawKind::MarchenkoPastur,
        ] {
            assert!(make_law(&LawSpec::with_shape(kind, 0.0)).is_err());
            assert!(make_law(&LawSpec::with_shape(kind, -1.0)).is_err());
        }
        assert!(make_law(&LawSpec::new(LawKind::Uniform).located(0.0, 0.0)).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s: LawSpec = serde_json::from_str(r#"{"kind":"Uniform"}"#).unwrap();
        assert_eq!(s, LawSpec::new(LawKind::Uniform));
        let s: LawSpec =
            serde_json::from_str(r#"{"kind":"FreeTypeII","shape":2,"location":1,"scale":3}"#)
                .unwrap();
        assert_eq!(s.shape, Some(2.0));
        assert_eq!(s.scale, 3.0);
        assert!(serde_json::from_str::<LawSpec>(r#"{"kind":"Nope"}"#).is_err());
    }

    #[test]
    fn triangular_atom() {
        let t = law(LawKind::Triangular, 0.5);
        assert_eq!(t.cdf(0.0), 0.5);
        assert_eq!(t.cdf_left(0.0), 0.0);
        assert_eq!(t.tail(0.5), 0.25);
        let t = law(LawKind::Triangular, 2.0);
        assert_eq!(t.tail(0.75), 0.5);
        assert_eq!((t.lower(), t.upper()), (0.5, 1.0));
    }
}
