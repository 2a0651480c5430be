//! Free max-domains of attraction: norming constants, convergence reports,
//! regular-variation diagnostics, and peaks-over-threshold estimation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{
    exceedance_cdf, free_max_iterate, rescale, sup_distance, threshold_un, Cdf, GridSpec,
};
use crate::error::{Error, Result};
use crate::laws::{make_law, FreeType, LawKind, LawSpec};
use crate::numeric::{golden_max, integrate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormingRecipe {
    #[serde(rename = "type_1_mean_excess")]
    TypeIMeanExcess,
    #[serde(rename = "type_2_threshold")]
    TypeIIUn,
    #[serde(rename = "type_3_endpoint")]
    TypeIIIEndpoint,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormingConstants {
    pub n: u64,
    pub a_n: f64,
    pub b_n: f64,
    pub recipe: NormingRecipe,
}

impl NormingConstants {
    pub fn custom(n: u64, a_n: f64, b_n: f64) -> Result<Self> {
        if !(a_n > 0.0) || !a_n.is_finite() || !b_n.is_finite() {
            return Err(Error::invalid("a_n", format!("need a_n > 0, got ({a_n}, {b_n})")));
        }
        Ok(NormingConstants {
            n,
            a_n,
            b_n,
            recipe: NormingRecipe::Custom,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub a_n: f64,
    pub b_n: f64,
    pub sup_distance: f64,
}

/// Relative tail level below which the mean-excess integrand is dropped.
const TRUNCATION: f64 = 1e-15;

/// Mean excess `g(t) = ∫_t^ω F̄(s) ds / F̄(t)`.
pub fn mean_excess(f: &Cdf, t: f64) -> Result<f64> {
    let omega = f.upper();
    if !(t < omega) {
        return Err(Error::invalid("t", format!("{t} is not below ω(F) = {omega}")));
    }
    let tail_t = f.tail(t);
    if !(tail_t > 0.0) {
        return Err(Error::EmptyConditioning { threshold: t });
    }
    let end = if omega.is_finite() {
        omega
    } else {
        f.tail_inverse(TRUNCATION * tail_t, false)
    };
    if !end.is_finite() {
        return Err(Error::Numerical(format!(
            "tail does not fall below {:e}·F̄(t) at finite arguments",
            TRUNCATION
        )));
    }
    let q = integrate(|s| f.tail(s) / tail_t, t, end, 1e-13, 1e-13);
    let mut g = q.value;
    if !omega.is_finite() && end > 0.0 {
        // Past the cut the tail is treated as regularly varying with the
        // local index; heavy tails leave a remainder of order end·F̄(end).
        let (t1, t2) = (f.tail(end), f.tail(2.0 * end));
        if t1 > 0.0 && t2 > 0.0 {
            let idx = (t1 / t2).log2();
            if idx > 1.0 {
                g += end * t1 / tail_t / (idx - 1.0);
            }
        }
    }
    Ok(g)
}

/// Norming constants of the given type: `(u_n, 0)` for type II,
/// `(ω − u_n, ω)` for type III and `(g(u_n), u_n)` for type I.
pub fn norming_constants(f: &Cdf, n: u64, kind: FreeType) -> Result<NormingConstants> {
    if n < 2 {
        return Err(Error::invalid("n", "n must be at least 2"));
    }
    let omega = f.upper();
    let (a_n, b_n, recipe) = match kind {
        FreeType::II => {
            if omega.is_finite() {
                return Err(Error::invalid(
                    "kind",
                    format!("type II needs an unbounded tail; ω(F) = {omega}"),
                ));
            }
            (threshold_un(f, n)?, 0.0, NormingRecipe::TypeIIUn)
        }
        FreeType::III => {
            if !omega.is_finite() {
                return Err(Error::invalid("kind", "type III needs a finite upper endpoint"));
            }
            (f.gap_inverse(1.0 / n as f64), omega, NormingRecipe::TypeIIIEndpoint)
        }
        FreeType::I => {
            let u = threshold_un(f, n)?;
            (mean_excess(f, u)?, u, NormingRecipe::TypeIMeanExcess)
        }
    };
    if !(a_n > 0.0) || !a_n.is_finite() {
        return Err(Error::Numerical(format!("norming scale a_{n} = {a_n} is not positive")));
    }
    Ok(NormingConstants {
        n,
        a_n,
        b_n,
        recipe,
    })
}

/// Sup distance between `F^{⊡n}(a_n·x + b_n)` and `G` for each set of
/// constants, ascending in `n`.
pub fn convergence_report(
    f: &Cdf,
    g: &Cdf,
    constants: &[NormingConstants],
    grid: &GridSpec,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = constants
        .par_iter()
        .map(|c| {
            let h = rescale(&free_max_iterate(f, c.n)?, c.a_n, c.b_n)?;
            let points = grid.build(&[g, &h])?;
            Ok(ConvergenceRow {
                n: c.n,
                a_n: c.a_n,
                b_n: c.b_n,
                sup_distance: sup_distance(&h, g, &points),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RvMode {
    AtInfinity,
    AtEndpoint,
}

/// Largest deviation of the tail ratios from the power law over the
/// lattice: `|F̄(t·x)/F̄(t) − x^{−α}|` at infinity, or
/// `|F̄(ω − x·h)/F̄(ω − h) − x^{α}|` at a finite endpoint.
pub fn rv_check(f: &Cdf, alpha: f64, mode: RvMode, xs: &[f64], scales: &[f64]) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("{alpha} must be positive")));
    }
    if mode == RvMode::AtEndpoint && !f.upper().is_finite() {
        return Err(Error::invalid("mode", "endpoint mode needs a finite upper endpoint"));
    }
    let mut worst: f64 = 0.0;
    for &s in scales {
        let base = match mode {
            RvMode::AtInfinity => f.tail(s),
            RvMode::AtEndpoint => f.gap_tail(s),
        };
        if !(base > 0.0) {
            return Err(Error::Numerical(format!(
                "tail vanishes at scale {s}, beyond the effective support"
            )));
        }
        for &x in xs {
            let d = match mode {
                RvMode::AtInfinity => f.tail(s * x) / base - x.powf(-alpha),
                RvMode::AtEndpoint => f.gap_tail(x * s) / base - x.powf(alpha),
            };
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub gamma_hat: f64,
    pub sigma_hat: f64,
    pub n_exceedances: usize,
    pub log_likelihood: f64,
}

const GAMMA_MIN: f64 = -1.0;
const GAMMA_MAX: f64 = 5.0;

struct Exceedances {
    xs: Vec<f64>,
    max: f64,
    mean: f64,
}

impl Exceedances {
    fn loglik(&self, gamma: f64, sigma: f64) -> f64 {
        let n = self.xs.len() as f64;
        if gamma == 0.0 {
            return -n * sigma.ln() - self.mean * n / sigma;
        }
        if gamma == -1.0 {
            // Uniform on [0, σ]; the weight 1 + 1/γ of the log terms is 0.
            return if sigma >= self.max { -n * sigma.ln() } else { f64::NEG_INFINITY };
        }
        let s: f64 = self.xs.iter().map(|&x| (gamma * x / sigma).ln_1p()).sum();
        -n * sigma.ln() - (1.0 + 1.0 / gamma) * s
    }

    /// Maximizer over σ of the likelihood at fixed γ.
    fn profile_sigma(&self, gamma: f64) -> f64 {
        if gamma == 0.0 {
            return self.mean;
        }
        if gamma <= -1.0 {
            return -gamma * self.max;
        }
        let n = self.xs.len() as f64;
        // (γ + 1)·Σ x/(σ + γx) = n; the left side decreases in σ.
        let excess = |sigma: f64| {
            let s: f64 = self.xs.iter().map(|&x| x / (sigma + gamma * x)).sum();
            (gamma + 1.0) * s - n
        };
        let mut lo = if gamma < 0.0 {
            -gamma * self.max
        } else {
            self.max * 1e-12
        };
        let mut hi = self.mean.max(lo) * 2.0 + self.max;
        while excess(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        if excess(lo.max(f64::MIN_POSITIVE)) <= 0.0 && gamma > 0.0 {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn profile(&self, gamma: f64) -> f64 {
        let l = self.loglik(gamma, self.profile_sigma(gamma));
        if l.is_nan() {
            f64::NEG_INFINITY
        } else {
            l
        }
    }

    /// Probability-weighted-moment estimate of γ.
    fn pwm_gamma(&self, sorted: &[f64]) -> f64 {
        let n = sorted.len() as f64;
        let a0 = self.mean;
        let a1 = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| (1.0 - (i as f64 + 0.65) / n) * x)
            .sum::<f64>()
            / n;
        2.0 - a0 / (a0 - 2.0 * a1)
    }
}

/// Maximum-likelihood fit of `G_γ(x/σ)` with σ profiled out and γ searched
/// on `[−1, 5]` (the likelihood is unbounded for γ < −1). The coarse scan
/// includes the probability-weighted-moment estimate; ties go to the
/// smaller `|γ|`.
pub fn fit_gpd(exceedances: &[f64]) -> Result<GpdFit> {
    if exceedances.len() < 20 {
        return Err(Error::invalid(
            "exceedances",
            format!("need at least 20 values, got {}", exceedances.len()),
        ));
    }
    if let Some(x) = exceedances.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::invalid("exceedances", format!("{x} is not a nonnegative number")));
    }
    let mut sorted = exceedances.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::Degenerate("all exceedances are equal".into()));
    }
    let n = sorted.len();
    let data = Exceedances {
        max: sorted[n - 1],
        mean: sorted.iter().sum::<f64>() / n as f64,
        xs: sorted.clone(),
    };

    let step = 0.05;
    let mut candidates: Vec<f64> = (0..=((GAMMA_MAX - GAMMA_MIN) / step).round() as usize)
        .map(|i| ((GAMMA_MIN + step * i as f64) * 1e6).round() / 1e6)
        .collect();
    let pwm = data.pwm_gamma(&sorted);
    if pwm.is_finite() {
        candidates.push(pwm.clamp(GAMMA_MIN, GAMMA_MAX));
    }
    let better = |cand: (f64, f64), best: (f64, f64)| {
        let tie = (cand.1 - best.1).abs() <= 1e-12 * best.1.abs().max(1.0);
        if tie {
            cand.0.abs() < best.0.abs()
        } else {
            cand.1 > best.1
        }
    };
    let mut best = (candidates[0], data.profile(candidates[0]));
    for &g in &candidates[1..] {
        let cand = (g, data.profile(g));
        if better(cand, best) {
            best = cand;
        }
    }
    let lo = (best.0 - step).max(GAMMA_MIN);
    let hi = (best.0 + step).min(GAMMA_MAX);
    let refined = golden_max(|g| data.profile(g), lo, hi, 1e-7);
    if better(refined, best) {
        best = refined;
    }
    let sigma = data.profile_sigma(best.0);
    Ok(GpdFit {
        gamma_hat: best.0,
        sigma_hat: sigma,
        n_exceedances: n,
        log_likelihood: best.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdhRow {
    pub u: f64,
    pub sigma_u: f64,
    pub sup_distance: f64,
}

fn gpd_median(gamma: f64) -> f64 {
    if gamma == 0.0 {
        std::f64::consts::LN_2
    } else {
        (2f64.powf(gamma) - 1.0) / gamma
    }
}

/// For each threshold, matches the median of `F^{[u]}` to that of
/// `G_γ(·/σ)` and reports the grid sup distance between the two.
pub fn balkema_de_haan_check(
    f: &Cdf,
    gamma: f64,
    u_list: &[f64],
    grid: &GridSpec,
) -> Result<Vec<BdhRow>> {
    let g = make_law(&LawSpec::with_shape(LawKind::GeneralizedPareto, gamma))?;
    let m = gpd_median(gamma);
    u_list
        .iter()
        .map(|&u| {
            let e = exceedance_cdf(f, u)?;
            let sigma_u = e.quantile(0.5)? / m;
            if !(sigma_u > 0.0) {
                return Err(Error::Degenerate(format!("exceedance median at u = {u} is 0")));
            }
            let target = rescale(&g, 1.0 / sigma_u, 0.0)?;
            let points = grid.build(&[&e, &target])?;
            Ok(BdhRow {
                u,
                sigma_u,
                sup_distance: sup_distance(&e, &target, &points),
            })
        })
        .collect()
}
