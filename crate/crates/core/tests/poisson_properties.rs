use freemax::cdf::{free_max_conv, ks_distance};
use freemax::poisson::{
    extremal_process_report, factor_range, join_additivity, mp_bulk_cdf, range_projection,
    realize_triangular_process, triangular_law_cdf, triangular_subset_max, FreePoissonSample,
    Partition, RANGE_TOLERANCE,
};
use freemax::spectral::{empirical_spectral_cdf, gaussian_matrix, HermitianMatrix, RngSeed};
use proptest::prelude::*;

fn masses() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..0.9, 1..5)
}

fn op_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn range_trace_is_capped_mass(mu in masses(), seed in 0u64..1_000_000) {
        let n = 40;
        let partition = Partition::from_masses(&mu).unwrap();
        let sample = FreePoissonSample::new(&partition, n, RngSeed(seed)).unwrap();
        for s in partition.power_set() {
            // Gaussian columns are in general position, so the rank is
            // min(columns, N) with probability one.
            let cols = sample.allotment().columns_of(&s).len();
            let r = sample.range(&s, false);
            prop_assert_eq!(r.rank, cols.min(n));
            let mu_n = sample.allotment().mass(&s);
            let slack = s.indices().len() as f64 / (2.0 * n as f64);
            prop_assert!((mu_n - partition.mass(&s)).abs() <= slack + 1e-12);
        }
    }

    #[test]
    fn ranges_join_over_disjoint_subsets(mu in masses(), seed in 0u64..1_000_000) {
        let partition = Partition::from_masses(&mu).unwrap();
        let sample = FreePoissonSample::new(&partition, 32, RngSeed(seed)).unwrap();
        for s in partition.power_set() {
            if let Some((a, b)) = s.split_first() {
                let j = join_additivity(&sample, &a, &b).unwrap();
                prop_assert!(j.ok, "{s}: {j:?}");
            }
        }
    }

    #[test]
    fn pi_is_additive_over_disjoint_subsets(mu in masses(), seed in 0u64..1_000_000) {
        let partition = Partition::from_masses(&mu).unwrap();
        let sample = FreePoissonSample::new(&partition, 24, RngSeed(seed)).unwrap();
        for s in partition.power_set() {
            if let Some((a, b)) = s.split_first() {
                let sum = sample.pi(&a).add(&sample.pi(&b)).unwrap();
                let whole = sample.pi(&s);
                let scale = whole.matrix().amax().max(1.0);
                prop_assert!((sum.matrix() - whole.matrix()).amax() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn factor_range_agrees_with_the_gram_matrix(
        rows in 8usize..30, cols in 1usize..40, seed in 0u64..1_000_000,
    ) {
        let g = gaussian_matrix(rows, cols, 1.0, &mut RngSeed(seed).rng());
        let fr = factor_range(&g, true);
        let pi = HermitianMatrix::new(&g * g.transpose()).unwrap();
        let direct = range_projection(&pi, RANGE_TOLERANCE).unwrap();
        prop_assert_eq!(fr.rank, direct.rank());
        let basis = fr.basis.unwrap();
        let proj = &basis * basis.transpose();
        prop_assert!((proj - direct.matrix()).amax() < 1e-8);
        let top = pi.spectrum()[rows - 1];
        prop_assert!((fr.nonzero[fr.rank - 1] - top).abs() <= 1e-10 * top);
    }
}

#[test]
fn spectrum_sits_in_the_marchenko_pastur_support() {
    let partition = Partition::from_masses(&[0.25]).unwrap();
    let s = partition.subset("1").unwrap();
    let sample = FreePoissonSample::new(&partition, 400, RngSeed(11)).unwrap();
    let r = sample.range(&s, false);
    assert_eq!(r.rank, 100);
    // Bulk edges (1 ∓ √μ)² = 0.25 and 2.25.
    let (lo, hi) = (r.nonzero[0], r.nonzero[r.rank - 1]);
    assert!(lo > 0.25 - 0.1 && hi < 2.25 + 0.1, "[{lo}, {hi}]");
}

#[test]
fn small_mass_pi_is_close_to_its_range() {
    let mu = 0.09;
    let partition = Partition::from_masses(&[mu]).unwrap();
    let s = partition.subset("1").unwrap();
    let sample = FreePoissonSample::new(&partition, 400, RngSeed(3)).unwrap();
    let pi = sample.pi(&s);
    let y = range_projection(&pi, RANGE_TOLERANCE).unwrap();
    let d = op_norm(&(y.matrix() - pi.matrix()));
    // On the range the eigenvalues lie within 2√μ + μ of 1.
    assert!(d <= 3.0 * mu.sqrt() + 0.1, "{d}");
}

#[test]
fn ks_to_the_bulk_law_shrinks_with_n() {
    let partition = Partition::from_masses(&[0.5, 0.3]).unwrap();
    let subsets = partition.power_set();
    let ks: Vec<Vec<f64>> = [50, 200, 800]
        .iter()
        .map(|&n| {
            extremal_process_report(&partition, &subsets, n, 4, RngSeed(21))
                .unwrap()
                .records
                .iter()
                .map(|r| r.ks_distance.unwrap())
                .collect()
        })
        .collect();
    for j in 0..subsets.len() {
        let path = [ks[0][j], ks[1][j], ks[2][j]];
        assert!(path[2] < path[1] && path[1] < path[0] && path[2] < 0.05, "{j}: {path:?}");
    }
}

#[test]
fn wishart_spectrum_matches_marchenko_pastur() {
    // Rate M/N = 2: full rank, no atom at zero.
    let (n, m) = (300, 600);
    let g = gaussian_matrix(n, m, (1.0 / n as f64).sqrt(), &mut RngSeed(17).rng());
    let r = factor_range(&g, false);
    assert_eq!(r.rank, n);
    let d = ks_distance(&r.nonzero, &mp_bulk_cdf(2.0).unwrap()).unwrap();
    assert!(d < 0.03, "{d}");
}

#[test]
fn triangular_max_is_exactly_the_free_max_of_its_parts() {
    let partition = Partition::from_masses(&[0.3, 0.4, 0.2]).unwrap();
    let z = realize_triangular_process(&partition, 120, RngSeed(8)).unwrap();
    for spec in ["1,2", "1,3", "1,2,3"] {
        let s = partition.subset(spec).unwrap();
        let zmax = triangular_subset_max(&z, &s).unwrap();
        let parts = s
            .indices()
            .iter()
            .map(|&j| empirical_spectral_cdf(&z[j]))
            .reduce(|a, b| free_max_conv(&a, &b))
            .unwrap();
        let fz = empirical_spectral_cdf(&zmax);
        for &x in zmax.spectrum() {
            assert!((fz.cdf(x) - parts.cdf(x)).abs() <= 1e-9, "{spec} at {x}");
        }
        // And the analytic law adds masses.
        let m: f64 = s.indices().iter().map(|&j| partition.atoms()[j].mass).sum();
        let d = ks_distance(zmax.spectrum(), &triangular_law_cdf(m).unwrap()).unwrap();
        assert!(d <= 0.05, "{spec}: {d}");
    }
}
