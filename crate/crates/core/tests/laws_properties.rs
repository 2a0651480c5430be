use freemax::attraction::{convergence_report, norming_constants};
use freemax::cdf::{classical_max_conv, free_max_conv, free_max_iterate, rescale, sup_distance, GridSpec};
use freemax::laws::catalog::catalog;
use freemax::laws::{
    f_c_map, gpd_correspondence, make_law, minimized_stability_distance, stability_constants,
    stability_distance, verify_max_stable, FreeType, LawKind, LawSpec,
};
use freemax::Cdf;
use proptest::prelude::*;

fn law(kind: LawKind, shape: f64) -> Cdf {
    make_law(&LawSpec::with_shape(kind, shape)).unwrap()
}

fn grid_sup(f: &Cdf, g: &Cdf) -> f64 {
    let grid = GridSpec::default().build(&[f, g]).unwrap();
    sup_distance(f, g, &grid)
}

const TYPES: [FreeType; 3] = [FreeType::I, FreeType::II, FreeType::III];

#[test]
fn free_types_are_fixed_points_for_a_sweep() {
    let grid = GridSpec::default();
    for kind in TYPES {
        for alpha in [0.5, 1.0, 1.5, 3.0, 7.0] {
            let g = kind.law(alpha).unwrap();
            let points = grid.build(&[&g]).unwrap();
            for k in [2u64, 3, 7, 50, 1000, 1 << 30] {
                let c = stability_constants(kind, alpha, k as f64).unwrap();
                let d = stability_distance(&g, k, c.a_of_s, c.b_of_s, &points).unwrap();
                assert!(d <= 1e-10, "{kind:?} α={alpha} k={k}: {d:e}");
                let v = verify_max_stable(&g, k, 1e-10, &grid).unwrap();
                assert!(v.stable, "{kind:?} α={alpha} k={k}: {v:?}");
                assert!((v.a - c.a_of_s).abs() <= 1e-8 * c.a_of_s.max(1.0));
            }
        }
    }
}

#[test]
fn free_types_attract_themselves() {
    let grid = GridSpec::default();
    for kind in TYPES {
        for alpha in [0.5, 2.0] {
            let g = kind.law(alpha).unwrap();
            let consts: Vec<_> = [2u64, 10, 1000, 1_000_000]
                .iter()
                .map(|&n| norming_constants(&g, n, kind).unwrap())
                .collect();
            for row in convergence_report(&g, &g, &consts, &grid).unwrap() {
                assert!(row.sup_distance <= 1e-10, "{kind:?} α={alpha}: {row:?}");
            }
        }
    }
}

#[test]
fn classical_extreme_value_laws_are_not_free_stable() {
    let grid = GridSpec::default();
    for (kind, shape) in [
        (LawKind::ClassicalGumbel, 1.0),
        (LawKind::ClassicalFrechet, 2.0),
        (LawKind::ClassicalWeibull, 2.0),
    ] {
        let g = law(kind, shape);
        assert!(!verify_max_stable(&g, 2, 1e-3, &grid).unwrap().stable);
        let m = minimized_stability_distance(&g, 2, &grid).unwrap();
        assert!(m.sup_distance > 1e-3, "{kind:?}: {}", m.sup_distance);
    }
}

#[test]
fn fc_carries_classical_powers_to_free_iterates() {
    for (name, f) in catalog() {
        for c in [0.5, 1.0, 2.0] {
            let mut power = f.clone();
            for n in 2..=5u64 {
                power = classical_max_conv(&power, &f);
                let lhs = f_c_map(&power, c).unwrap();
                let rhs = free_max_iterate(&f_c_map(&f, c).unwrap(), n).unwrap();
                let d = grid_sup(&lhs, &rhs);
                assert!(d <= 1e-12, "{name} c={c} n={n}: {d:e}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fc_homomorphism_on_catalog_pairs(
        i in 0usize..10, j in 0usize..10, c in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
    ) {
        let laws = catalog();
        let (f, g) = (&laws[i].1, &laws[j].1);
        let lhs = f_c_map(&classical_max_conv(f, g), c).unwrap();
        let rhs = free_max_conv(&f_c_map(f, c).unwrap(), &f_c_map(g, c).unwrap());
        prop_assert!(grid_sup(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn real_index_stability(kind in 0usize..3, alpha in 0.3f64..5.0, s in 1.0f64..1e6) {
        let kind = TYPES[kind];
        let g = kind.law(alpha).unwrap();
        let c = stability_constants(kind, alpha, s).unwrap();
        let h = rescale(&freemax::cdf::free_max_power(&g, s).unwrap(), c.a_of_s, c.b_of_s).unwrap();
        prop_assert!(grid_sup(&h, &g) <= 1e-10);
    }

    #[test]
    fn gpd_is_an_affine_free_type(gamma in -3.0f64..3.0) {
        let gpd = law(LawKind::GeneralizedPareto, gamma);
        let c = gpd_correspondence(gamma);
        let base = c.kind.law(c.alpha.unwrap_or(1.0)).unwrap();
        let mapped = rescale(&base, c.a, c.b).unwrap();
        let d = grid_sup(&gpd, &mapped);
        prop_assert!(d <= 1e-12, "γ = {gamma}: {d:e}");
    }
}
