//! Pointwise identities of the extremal convolutions, checked against
//! closed forms written out independently of the library.

use freemax::cdf::{
    exceedance_cdf, free_max_conv, free_max_iterate, free_max_power, free_min_conv,
    lower_endpoint_iterate, reflect, rescale, threshold_un,
};
use freemax::laws::{make_law, LawKind, LawSpec};
use freemax::Cdf;
use proptest::prelude::*;

fn law(kind: LawKind, shape: f64) -> Cdf {
    make_law(&LawSpec::with_shape(kind, shape)).unwrap()
}

fn exponential_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x).exp()
    }
}

fn pareto_cdf(alpha: f64, x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        1.0 - x.powf(-alpha)
    }
}

/// A few laws with different supports: exponential, Pareto(α), normal and
/// a uniform moved to `[−1, 2]`.
fn some_law() -> impl Strategy<Value = Cdf> {
    prop_oneof![
        Just(law(LawKind::FreeTypeI, 1.0)),
        (0.5f64..3.0).prop_map(|a| law(LawKind::FreeTypeII, a)),
        Just(law(LawKind::StdNormal, 1.0)),
        Just(make_law(&LawSpec::new(LawKind::Uniform).located(-1.0, 3.0)).unwrap()),
        (0.5f64..3.0).prop_map(|a| law(LawKind::ClassicalWeibull, a)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_max_matches_closed_form(a in 0.5f64..3.0, x in -1.0f64..20.0) {
        let e = law(LawKind::FreeTypeI, 1.0);
        let p = law(LawKind::FreeTypeII, a);
        let h = free_max_conv(&e, &p);
        let oracle = (exponential_cdf(x) + pareto_cdf(a, x) - 1.0).max(0.0);
        prop_assert!((h.cdf(x) - oracle).abs() <= 1e-15);
        let m = free_min_conv(&e, &p);
        let oracle = (exponential_cdf(x) + pareto_cdf(a, x)).min(1.0);
        prop_assert!((m.cdf(x) - oracle).abs() <= 1e-15);
    }

    #[test]
    fn convolutions_commute_and_associate(
        f in some_law(), g in some_law(), h in some_law(), x in -3.0f64..30.0,
    ) {
        for op in [free_max_conv, free_min_conv] {
            prop_assert!((op(&f, &g).cdf(x) - op(&g, &f).cdf(x)).abs() <= 1e-12);
            let l = op(&op(&f, &g), &h).cdf(x);
            let r = op(&f, &op(&g, &h)).cdf(x);
            prop_assert!((l - r).abs() <= 1e-12);
        }
    }

    #[test]
    fn tail_of_free_max_is_capped_sum(f in some_law(), g in some_law(), x in -3.0f64..30.0) {
        let t = free_max_conv(&f, &g).tail(x);
        prop_assert!((t - (f.tail(x) + g.tail(x)).min(1.0)).abs() <= 1e-15);
    }

    #[test]
    fn reflection_exchanges_max_and_min(f in some_law(), g in some_law(), x in -30.0f64..30.0) {
        let lhs = reflect(&free_max_conv(&f, &g));
        let rhs = free_min_conv(&reflect(&f), &reflect(&g));
        // Reflection is defined up to the value at atoms; these laws have none.
        prop_assert!((lhs.cdf(x) - rhs.cdf(x)).abs() <= 1e-12);
        let lhs = reflect(&free_min_conv(&f, &g));
        let rhs = free_max_conv(&reflect(&f), &reflect(&g));
        prop_assert!((lhs.cdf(x) - rhs.cdf(x)).abs() <= 1e-12);
    }

    #[test]
    fn iterate_is_repeated_convolution(f in some_law(), n in 2u64..7, x in -3.0f64..30.0) {
        let mut acc = f.clone();
        for _ in 1..n {
            acc = free_max_conv(&acc, &f);
        }
        prop_assert!((free_max_iterate(&f, n).unwrap().cdf(x) - acc.cdf(x)).abs() <= 1e-12);
    }

    #[test]
    fn power_semigroup(f in some_law(), s in 1.0f64..6.0, t in 1.0f64..6.0, x in -3.0f64..40.0) {
        let lhs = free_max_power(&f, s * t).unwrap().cdf(x);
        let rhs = free_max_power(&free_max_power(&f, s).unwrap(), t).unwrap().cdf(x);
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn iterate_is_conditioning_above_threshold(
        f in some_law(), n in 2u64..500, x in 0.0f64..10.0,
    ) {
        // F^{⊡n}(u_n + x) = P(X ≤ u_n + x | X > u_n) for continuous F,
        // since n·F̄(u_n) = 1.
        let u = threshold_un(&f, n).unwrap();
        prop_assume!(f.tail(u) > 0.0 && (f.tail(u) * n as f64 - 1.0).abs() < 1e-9);
        let it = free_max_iterate(&f, n).unwrap().cdf(u + x);
        let ex = exceedance_cdf(&f, u).unwrap().cdf(x);
        prop_assert!((it - ex).abs() <= 1e-8, "{it} vs {ex}");
    }

    #[test]
    fn rescale_is_affine_substitution(a in 0.1f64..10.0, b in -5.0f64..5.0, x in -5.0f64..20.0) {
        let e = law(LawKind::FreeTypeI, 1.0);
        let r = rescale(&e, a, b).unwrap();
        prop_assert!((r.cdf(x) - exponential_cdf(a * x + b)).abs() <= 1e-15);
    }
}

#[test]
fn iterate_support_endpoints() {
    for f in [
        law(LawKind::StdNormal, 1.0),
        law(LawKind::FreeTypeII, 2.0),
        law(LawKind::ClassicalWeibull, 1.5),
    ] {
        let mut prev = f64::NEG_INFINITY;
        for n in [2u64, 4, 16, 256, 65_536] {
            let fi = free_max_iterate(&f, n).unwrap();
            assert_eq!(fi.upper(), f.upper());
            let lo = lower_endpoint_iterate(&f, n).unwrap();
            assert!(lo.is_finite() && lo > prev);
            assert!(lo <= f.upper());
            prev = lo;
        }
    }
    // For a finite endpoint the lower endpoints approach it.
    let w = law(LawKind::ClassicalWeibull, 1.0);
    let gap = w.upper() - lower_endpoint_iterate(&w, 1 << 40).unwrap();
    assert!(gap < 1e-10);
}
