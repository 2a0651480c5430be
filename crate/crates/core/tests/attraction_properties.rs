use freemax::attraction::{
    convergence_report, fit_gpd, mean_excess, norming_constants, rv_check, RvMode,
};
use freemax::cdf::{free_max_iterate, rescale, GridSpec};
use freemax::laws::catalog::Cauchy;
use freemax::laws::{gpd_correspondence, make_law, FreeType, LawKind, LawSpec};
use freemax::spectral::RngSeed;
use freemax::Cdf;
use proptest::prelude::*;
use rand::Rng;
use statrs::function::erf::erfc;

fn law(kind: LawKind, shape: f64) -> Cdf {
    make_law(&LawSpec::with_shape(kind, shape)).unwrap()
}

fn distances(f: &Cdf, kind: FreeType, alpha: f64, ns: &[u64]) -> Vec<f64> {
    let consts: Vec<_> = ns.iter().map(|&n| norming_constants(f, n, kind).unwrap()).collect();
    convergence_report(f, &kind.law(alpha).unwrap(), &consts, &GridSpec::default())
        .unwrap()
        .iter()
        .map(|r| r.sup_distance)
        .collect()
}

#[test]
fn classical_domains_coincide_with_free_ones() {
    let ns = [100u64, 1000, 10_000];
    // Normal (classical Gumbel domain) and Cauchy (Fréchet 1) converge
    // strictly; the uniform (Weibull 1) is already exact.
    for (name, f, kind, alpha) in [
        ("normal", law(LawKind::StdNormal, 1.0), FreeType::I, 1.0),
        ("cauchy", Cdf::new(Cauchy), FreeType::II, 1.0),
    ] {
        let d = distances(&f, kind, alpha, &ns);
        assert!(d[0] > d[1] && d[1] > d[2] && d[2] < 0.05, "{name}: {d:?}");
    }
    let d = distances(&law(LawKind::Uniform, 1.0), FreeType::III, 1.0, &ns);
    assert!(d.iter().all(|&x| x <= 1e-12), "uniform: {d:?}");
}

#[test]
fn exactness_triad_at_extreme_n() {
    for n in [2u64, 10, 1_000_000] {
        for (f, kind, alpha) in [
            (law(LawKind::Uniform, 1.0), FreeType::III, 1.0),
            (law(LawKind::FreeTypeI, 1.0), FreeType::I, 1.0),
            (law(LawKind::FreeTypeII, 1.5), FreeType::II, 1.5),
        ] {
            let d = distances(&f, kind, alpha, &[n]);
            assert!(d[0] <= 1e-12, "{kind:?} n={n}: {}", d[0]);
        }
    }
}

/// Mills-ratio form of the normal mean excess: φ(t)/F̄(t) − t.
fn normal_mean_excess(t: f64) -> f64 {
    let phi = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = 0.5 * erfc(t / std::f64::consts::SQRT_2);
    phi / tail - t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gpd_mean_excess_is_linear(gamma in -2.0f64..0.9, s in 0.0f64..0.95) {
        // g(t) = (1 + γt)/(1 − γ) on the support.
        let f = law(LawKind::GeneralizedPareto, gamma);
        let t = if gamma < 0.0 { s * -1.0 / gamma } else { 10.0 * s };
        let g = mean_excess(&f, t).unwrap();
        let oracle = (1.0 + gamma * t) / (1.0 - gamma);
        prop_assert!((g - oracle).abs() <= 1e-9 * oracle.max(1.0), "{g} vs {oracle}");
    }

    #[test]
    fn normal_mean_excess_matches_mills_ratio(t in -2.0f64..8.0) {
        let f = law(LawKind::StdNormal, 1.0);
        let g = mean_excess(&f, t).unwrap();
        prop_assert!((g - normal_mean_excess(t)).abs() <= 1e-9, "{t}: {g}");
    }

    #[test]
    fn pareto_tail_is_exactly_regularly_varying(alpha in 0.2f64..5.0) {
        let f = law(LawKind::FreeTypeII, alpha);
        let d = rv_check(&f, alpha, RvMode::AtInfinity, &[0.5, 2.0, 10.0], &[3.0, 1e3, 1e6]).unwrap();
        prop_assert!(d <= 1e-12);
        let b = law(LawKind::FreeTypeIII, alpha);
        let d = rv_check(&b, alpha, RvMode::AtEndpoint, &[0.5, 2.0], &[0.1, 1e-3, 1e-6]).unwrap();
        prop_assert!(d <= 1e-12);
    }
}

fn draw(f: &Cdf, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngSeed(seed).rng();
    (0..n).map(|_| f.quantile(rng.gen::<f64>()).unwrap()).collect()
}

#[test]
fn fit_gpd_recovers_the_limit_index_of_iterates() {
    // Samples of the normalized iterate F^{⊡n}(a_n·x + b_n), n = 1000; the
    // GPD index fitted above its lower endpoint must match the limit type.
    let cases = [
        (law(LawKind::FreeTypeII, 2.0), FreeType::II, 0.5),
        (Cdf::new(Cauchy), FreeType::II, 1.0),
        (law(LawKind::Uniform, 1.0), FreeType::III, -1.0),
        (law(LawKind::StdNormal, 1.0), FreeType::I, 0.0),
    ];
    for (k, (f, kind, gamma)) in cases.into_iter().enumerate() {
        let c = norming_constants(&f, 1000, kind).unwrap();
        let h = rescale(&free_max_iterate(&f, 1000).unwrap(), c.a_n, c.b_n).unwrap();
        let lo = h.lower();
        let xs: Vec<f64> = draw(&h, 100_000, 500 + k as u64).iter().map(|x| x - lo).collect();
        let fit = fit_gpd(&xs).unwrap();
        let corr = gpd_correspondence(gamma);
        assert_eq!(corr.kind, kind);
        assert!((fit.gamma_hat - gamma).abs() <= 0.1, "{kind:?}: γ̂ = {}", fit.gamma_hat);
    }
}

#[test]
fn fit_gpd_is_deterministic_and_scale_equivariant() {
    let xs = draw(&law(LawKind::GeneralizedPareto, 0.3), 20_000, 9);
    let a = fit_gpd(&xs).unwrap();
    assert_eq!(a, fit_gpd(&xs).unwrap());
    let scaled: Vec<f64> = xs.iter().map(|x| 4.0 * x).collect();
    let b = fit_gpd(&scaled).unwrap();
    assert!((a.gamma_hat - b.gamma_hat).abs() < 1e-6);
    assert!((b.sigma_hat / a.sigma_hat - 4.0).abs() < 1e-5);
}
