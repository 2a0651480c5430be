use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mp::mp_bulk_cdf;
use super::partition::{Allotment, Partition, SubsetId};
use crate::cdf::ks_distance;
use crate::error::{Error, Result};
use crate::spectral::lattice::project_out;
use crate::spectral::{gaussian_matrix, proj_join, HermitianMatrix, Projection, RngSeed};

/// Eigenvalues above this fraction of `λ_max` belong to the range.
pub const RANGE_TOLERANCE: f64 = 1e-8;

pub(crate) const MIN_DIMENSION: usize = 8;

fn check_n(n: usize) -> Result<()> {
    if n < MIN_DIMENSION {
        return Err(Error::invalid("N", format!("dimension {n} is below {MIN_DIMENSION}")));
    }
    Ok(())
}

/// One draw of the Gaussian matrix `Γ` (`N × M`, entries of variance
/// `1/N`) shared by every subset of the partition.
#[derive(Debug, Clone)]
pub struct FreePoissonSample {
    gamma: DMatrix<f64>,
    allotment: Allotment,
}

impl FreePoissonSample {
    pub fn new(partition: &Partition, n: usize, seed: RngSeed) -> Result<Self> {
        check_n(n)?;
        let allotment = partition.allot(n);
        let mut rng = seed.rng();
        let gamma = gaussian_matrix(n, allotment.columns, (1.0 / n as f64).sqrt(), &mut rng);
        Ok(FreePoissonSample { gamma, allotment })
    }

    pub fn allotment(&self) -> &Allotment {
        &self.allotment
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    /// `Γ·D(ω)` restricted to its nonzero columns.
    pub fn factor(&self, subset: &SubsetId) -> DMatrix<f64> {
        self.gamma.select_columns(self.allotment.columns_of(subset).iter())
    }

    /// `Π(ω) = Γ·D(ω)·Γᵀ`, summed atom by atom in partition order.
    pub fn pi(&self, subset: &SubsetId) -> HermitianMatrix {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &i in subset.indices() {
            let block = self.gamma.columns_range(self.allotment.ranges[i].clone());
            m += &block * block.transpose();
        }
        HermitianMatrix::new(m).expect("Gram matrices are symmetric")
    }

    /// Range and nonzero spectrum of `Π(ω)`, computed from the smaller of
    /// the two Gram matrices of its factor.
    pub fn range(&self, subset: &SubsetId, with_basis: bool) -> FactorRange {
        factor_range(&self.factor(subset), with_basis)
    }
}

/// Range data of `G·Gᵀ`.
#[derive(Debug, Clone)]
pub struct FactorRange {
    pub rank: usize,
    /// Nonzero eigenvalues, ascending.
    pub nonzero: Vec<f64>,
    pub basis: Option<DMatrix<f64>>,
}

impl FactorRange {
    pub fn projection(&self) -> Option<Projection> {
        self.basis.clone().map(Projection::from_orthonormal)
    }
}

fn sorted_eigen(m: DMatrix<f64>, vectors: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
    if vectors {
        let h = HermitianMatrix::new(m).expect("Gram matrices are symmetric");
        (h.spectrum().to_vec(), Some(h.eigenvectors().clone()))
    } else {
        let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        (v, None)
    }
}

/// Range of `G·Gᵀ` for an `N × m` factor `G`. For `m < N` the nonzero
/// spectrum is that of `Gᵀ·G` and the range basis is `G·V·Σ⁻¹`.
pub fn factor_range(g: &DMatrix<f64>, with_basis: bool) -> FactorRange {
    let (n, m) = g.shape();
    if m == 0 {
        return FactorRange {
            rank: 0,
            nonzero: Vec::new(),
            basis: with_basis.then(|| DMatrix::zeros(n, 0)),
        };
    }
    let small = m < n;
    let gram = if small { g.transpose() * g } else { g * g.transpose() };
    // With full rank the range is I (m ≥ N) or the column space of G,
    // whose thin QR factor is far cheaper than Gram eigenvectors.
    let (values, vectors) = if with_basis {
        let (values, _) = sorted_eigen(gram.clone(), false);
        let lmax = values.last().copied().unwrap_or(0.0);
        if values[0] > RANGE_TOLERANCE * lmax {
            let basis = if small { g.clone().qr().q() } else { DMatrix::identity(n, n) };
            return FactorRange {
                rank: values.len(),
                nonzero: values,
                basis: Some(basis),
            };
        }
        sorted_eigen(gram, true)
    } else {
        sorted_eigen(gram, false)
    };
    let lmax = values.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] > RANGE_TOLERANCE * lmax)
        .collect();
    let nonzero: Vec<f64> = keep.iter().map(|&i| values[i]).collect();
    let rank = keep.len();
    let basis = vectors.map(|v| {
        let v = v.select_columns(keep.iter());
        if small {
            // Orthonormal up to rounding times cond(G) = sqrt(λ_max/λ_min).
            let mut u = g * v;
            for (j, &lam) in nonzero.iter().enumerate() {
                u.column_mut(j).scale_mut(1.0 / lam.sqrt());
            }
            u
        } else {
            v
        }
    });
    FactorRange {
        rank,
        nonzero,
        basis,
    }
}

/// `Π_N(ω)` for one seed.
pub fn sample_free_poisson_matrix(
    partition: &Partition,
    subset: &SubsetId,
    n: usize,
    seed: RngSeed,
) -> Result<HermitianMatrix> {
    Ok(FreePoissonSample::new(partition, n, seed)?.pi(subset))
}

/// Range projection `Y` of a positive semidefinite matrix: eigenvectors
/// with eigenvalue `> tol·λ_max`.
pub fn range_projection(a: &HermitianMatrix, tol: f64) -> Result<Projection> {
    let v = a.spectrum();
    let lmax = v[v.len() - 1].max(0.0);
    let scale = v[v.len() - 1].abs().max(v[0].abs());
    if v[0] < -tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::invalid(
            "A",
            format!("eigenvalue {:e} is negative beyond tolerance", v[0]),
        ));
    }
    let keep: Vec<usize> = (0..v.len()).filter(|&i| v[i] > tol * lmax).collect();
    Ok(Projection::from_orthonormal(
        a.eigenvectors().select_columns(keep.iter()),
    ))
}

/// Largest residual of `range(p)` outside `range(q)` in Frobenius norm; an
/// upper bound for the sine of the largest principal angle.
fn outside(p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    project_out(q, p).norm()
}

/// Compares `Y(ω)` with `Y(first) ∨ Y(rest)` for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JoinCheck {
    pub rank_union: usize,
    pub rank_join: usize,
    /// Frobenius bound on the sine of the largest principal angle.
    pub angle: f64,
    pub ok: bool,
}

pub const JOIN_ANGLE_TOLERANCE: f64 = 1e-8;

/// Checks `Y(α ∪ β) = Y(α) ∨ Y(β)` for disjoint `α`, `β`: equal integer
/// ranks, and `range Y(α ∪ β) ⊆ range (Y(α) ∨ Y(β))` to
/// [`JOIN_ANGLE_TOLERANCE`] (with equal ranks, inclusion is equality).
pub fn join_additivity(
    sample: &FreePoissonSample,
    alpha: &SubsetId,
    beta: &SubsetId,
) -> Result<JoinCheck> {
    let mut cache = RangeCache::default();
    join_additivity_cached(sample, alpha, beta, &mut cache)
}

#[derive(Default)]
struct RangeCache(Vec<(SubsetId, FactorRange)>);

impl RangeCache {
    fn get(&mut self, sample: &FreePoissonSample, s: &SubsetId) -> &FactorRange {
        let pos = match self.0.iter().position(|(k, r)| k == s && r.basis.is_some()) {
            Some(p) => p,
            None => {
                self.0.push((s.clone(), sample.range(s, true)));
                self.0.len() - 1
            }
        };
        &self.0[pos].1
    }
}

fn join_additivity_cached(
    sample: &FreePoissonSample,
    alpha: &SubsetId,
    beta: &SubsetId,
    cache: &mut RangeCache,
) -> Result<JoinCheck> {
    if !alpha.is_disjoint(beta) {
        return Err(Error::invalid("subsets", "join additivity needs disjoint subsets"));
    }
    let ya = cache.get(sample, alpha).projection().expect("basis requested");
    let yb = cache.get(sample, beta).projection().expect("basis requested");
    let union = cache.get(sample, &alpha.union(beta));
    let join = proj_join(&ya, &yb)?;
    let yu = union.basis.as_ref().expect("basis requested");
    let angle = if union.rank == join.rank() {
        outside(yu, join.basis())
    } else {
        f64::INFINITY
    };
    Ok(JoinCheck {
        rank_union: union.rank,
        rank_join: join.rank(),
        angle,
        ok: union.rank == join.rank() && angle < JOIN_ANGLE_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub subset: String,
    #[serde(rename = "N")]
    pub n: usize,
    /// `μ(ω)`.
    pub mass: f64,
    /// `μ_N(ω)`, the allotted fraction of columns.
    pub allotted_mass: f64,
    /// Mean of `τ(Y(ω))` over the trials.
    pub tau_y: f64,
    /// `min(μ(ω), 1)`.
    pub expected: f64,
    /// `Y(ω) = Y(first atom) ∨ Y(rest)` in every trial; `None` for a single
    /// atom, where there is nothing to split.
    pub join_additivity_ok: Option<bool>,
    /// Mean KS distance of the nonzero spectrum of `Π(ω)` to the
    /// Marchenko–Pastur bulk with rate `μ_N(ω)`; `None` without columns.
    pub ks_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub records: Vec<SubsetRecord>,
    pub warnings: Vec<String>,
}

struct TrialValues {
    tau: Vec<f64>,
    ks: Vec<Option<f64>>,
    joins: Vec<Option<bool>>,
}

fn run_trial(
    partition: &Partition,
    subsets: &[SubsetId],
    n: usize,
    seed: RngSeed,
) -> Result<TrialValues> {
    let sample = FreePoissonSample::new(partition, n, seed)?;
    let mut out = TrialValues {
        tau: Vec::new(),
        ks: Vec::new(),
        joins: Vec::new(),
    };
    let mut cache = RangeCache::default();
    for s in subsets {
        let with_basis = s.split_first().is_some();
        let fresh;
        let r = if with_basis {
            cache.get(&sample, s)
        } else {
            fresh = sample.range(s, false);
            &fresh
        };
        out.tau.push(r.rank as f64 / n as f64);
        out.ks.push(if r.nonzero.is_empty() {
            None
        } else {
            let law = mp_bulk_cdf(sample.allotment().mass(s))?;
            Some(ks_distance(&r.nonzero, &law)?)
        });
        out.joins.push(match s.split_first() {
            Some((a, b)) => Some(join_additivity_cached(&sample, &a, &b, &mut cache)?.ok),
            None => None,
        });
    }
    Ok(out)
}

/// Per-subset trace law, join additivity, and Marchenko–Pastur fit over
/// `trials` independent draws. Trial `k` uses `seed.child(k)`; trials run
/// in parallel and are reduced in index order.
pub fn extremal_process_report(
    partition: &Partition,
    subsets: &[SubsetId],
    n: usize,
    trials: usize,
    seed: RngSeed,
) -> Result<ProcessReport> {
    check_n(n)?;
    if trials == 0 {
        return Err(Error::invalid("trials", "at least one trial is needed"));
    }
    let results: Vec<TrialValues> = (0..trials)
        .into_par_iter()
        .map(|k| run_trial(partition, subsets, n, seed.child(k as u64)))
        .collect::<Result<_>>()?;
    let allot = partition.allot(n);
    let records = subsets
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let mass = partition.mass(s);
            let tau_y = results.iter().map(|t| t.tau[j]).sum::<f64>() / trials as f64;
            let ks: Option<Vec<f64>> = results.iter().map(|t| t.ks[j]).collect();
            let joins: Option<Vec<bool>> = results.iter().map(|t| t.joins[j]).collect();
            SubsetRecord {
                subset: partition.label(s),
                n,
                mass,
                allotted_mass: allot.mass(s),
                tau_y,
                expected: mass.min(1.0),
                join_additivity_ok: joins.map(|v| v.iter().all(|&b| b)),
                ks_distance: ks.map(|v| v.iter().sum::<f64>() / trials as f64),
            }
        })
        .collect();
    Ok(ProcessReport {
        seed: seed.0,
        n,
        trials,
        records,
        warnings: allot.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_projection_of_diagonals() {
        let a = HermitianMatrix::from_diagonal(&[0.0, 0.5, 2.0]).unwrap();
        assert_eq!(range_projection(&a, RANGE_TOLERANCE).unwrap().rank(), 2);
        let z = HermitianMatrix::zeros(3);
        assert_eq!(range_projection(&z, RANGE_TOLERANCE).unwrap().rank(), 0);
        let neg = HermitianMatrix::from_diagonal(&[-1.0, 2.0]).unwrap();
        assert!(range_projection(&neg, RANGE_TOLERANCE).is_err());
    }

    #[test]
    fn factor_range_matches_direct() {
        let p = Partition::from_masses(&[0.25, 0.5]).unwrap();
        let s = FreePoissonSample::new(&p, 40, RngSeed(9)).unwrap();
        let w = p.subset("1").unwrap();
        let fr = s.range(&w, true);
        let direct = range_projection(&s.pi(&w), RANGE_TOLERANCE).unwrap();
        assert_eq!(fr.rank, 10);
        assert_eq!(direct.rank(), 10);
        let b = fr.basis.unwrap();
        assert!(outside(&b, direct.basis()) < 1e-10);
        let eig = s.pi(&w).spectrum().to_vec();
        for (x, y) in fr.nonzero.iter().zip(&eig[30..]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn small_dimension_rejected() {
        let p = Partition::from_masses(&[0.5]).unwrap();
        assert!(FreePoissonSample::new(&p, 4, RngSeed(0)).is_err());
    }
}
