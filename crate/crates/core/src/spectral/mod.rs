//! Finite-dimensional spectral order: self-adjoint matrices, spectral
//! projections, the projection lattice, `a ∨ b` / `a ∧ b`, and their
//! monotone approximations.

mod approx;
pub mod io;
pub(crate) mod lattice;
mod order;
mod random;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cdf::{empirical_cdf, Cdf};
use crate::error::{Error, Result};

pub use approx::{logexp_approx, pnorm_approx};
pub use lattice::{
    general_position_check, proj_join, proj_leq, proj_meet, GeneralPosition, RANK_TOLERANCE,
};
pub use order::{spectral_leq, spectral_max, spectral_min};
pub use random::{
    gaussian_matrix, haar_conjugate, haar_orthogonal, haar_projection, random_symmetric, RngSeed,
};

/// Eigenvalues closer than this to a threshold count as lying on it.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

/// Tolerated asymmetry relative to `max(1, max |a_ij|)`.
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Eigen {
    /// Ascending.
    values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    vectors: DMatrix<f64>,
}

/// Real symmetric matrix with a lazily computed, cached spectral
/// resolution.
#[derive(Debug)]
pub struct HermitianMatrix {
    m: DMatrix<f64>,
    eigen: OnceLock<Eigen>,
    values: OnceLock<Vec<f64>>,
}

impl Clone for HermitianMatrix {
    fn clone(&self) -> Self {
        HermitianMatrix {
            m: self.m.clone(),
            eigen: self.eigen.clone(),
            values: self.values.clone(),
        }
    }
}

impl HermitianMatrix {
    /// Validates symmetry and stores the symmetrized matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix", "non-finite entry"));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NotHermitian(asym));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self::trusted(sym))
    }

    fn trusted(m: DMatrix<f64>) -> Self {
        HermitianMatrix {
            m,
            eigen: OnceLock::new(),
            values: OnceLock::new(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                left: n,
                right: r.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self::trusted(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::trusted(DMatrix::zeros(n, n))
    }

    /// `V·diag(values)·Vᵀ` for orthonormal columns `V`. The given spectral
    /// resolution is cached as is, so the spectrum is reproduced exactly.
    pub fn from_spectral(values: &[f64], vectors: DMatrix<f64>) -> Result<Self> {
        let n = vectors.nrows();
        if vectors.ncols() != n || values.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: values.len().min(vectors.ncols()),
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let vecs = vectors.select_columns(order.iter());
        let scaled = DMatrix::from_fn(n, n, |i, j| vecs[(i, j)] * sorted[j]);
        let m = &scaled * vecs.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let h = Self::trusted(m);
        let _ = h.values.set(sorted.clone());
        let _ = h.eigen.set(Eigen {
            values: sorted,
            vectors: vecs,
        });
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    fn eigen(&self) -> &Eigen {
        self.eigen.get_or_init(|| {
            let se = self.m.clone().symmetric_eigen();
            let n = self.dim();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
            Eigen {
                values: order.iter().map(|&i| se.eigenvalues[i]).collect(),
                vectors: se.eigenvectors.select_columns(order.iter()),
            }
        })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        if let Some(e) = self.eigen.get() {
            return &e.values;
        }
        self.values.get_or_init(|| {
            let mut v: Vec<f64> = self.m.symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            v
        })
    }

    /// Orthonormal eigenvectors (columns) matching [`Self::spectrum`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigen().vectors
    }

    /// Eigenvalues from the full decomposition (consistent with
    /// [`Self::eigenvectors`]).
    pub fn spectrum(&self) -> &[f64] {
        &self.eigen().values
    }

    /// Normalized trace `Tr/N`.
    pub fn tau(&self) -> f64 {
        self.m.trace() / self.dim() as f64
    }

    /// `f(a)` by functional calculus.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let e = self.eigen();
        let values: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
        Self::from_spectral(&values, e.vectors.clone()).expect("square spectral resolution")
    }

    pub fn shifted(&self, c: f64) -> HermitianMatrix {
        let n = self.dim();
        let h = Self::trusted(&self.m + DMatrix::identity(n, n) * c);
        if let Some(e) = self.eigen.get() {
            let values: Vec<f64> = e.values.iter().map(|x| x + c).collect();
            let _ = h.values.set(values.clone());
            let _ = h.eigen.set(Eigen {
                values,
                vectors: e.vectors.clone(),
            });
        }
        h
    }

    pub fn neg(&self) -> HermitianMatrix {
        let h = Self::trusted(-&self.m);
        if let Some(e) = self.eigen.get() {
            let n = self.dim();
            let values: Vec<f64> = e.values.iter().rev().map(|x| -x).collect();
            let vectors = e.vectors.select_columns((0..n).rev().collect::<Vec<_>>().iter());
            let _ = h.values.set(values.clone());
            let _ = h.eigen.set(Eigen { values, vectors });
        }
        h
    }

    pub fn frobenius_distance(&self, other: &HermitianMatrix) -> f64 {
        (&self.m - &other.m).norm()
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::trusted(&self.m - &other.m))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::trusted(&self.m + &other.m))
    }
}

pub(crate) fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a, right: b })
    }
}

/// Orthogonal projection stored through an orthonormal basis of its range.
#[derive(Debug, Clone)]
pub struct Projection {
    basis: DMatrix<f64>,
}

impl Projection {
    /// Wraps a basis whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Projection { basis }
    }

    /// Projection onto the span of the columns of `vectors`.
    pub fn span(vectors: &DMatrix<f64>) -> Self {
        lattice::orthonormal_span(vectors)
    }

    pub fn zero(n: usize) -> Self {
        Projection {
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub fn identity(n: usize) -> Self {
        Projection {
            basis: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn tau(&self) -> f64 {
        self.rank() as f64 / self.dim() as f64
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `P = B·Bᵀ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interval {
    /// `[t, ∞)`
    ClosedUp,
    /// `(t, ∞)`
    OpenUp,
    /// `(−∞, t]`
    ClosedDown,
    /// `(−∞, t)`
    OpenDown,
}

impl Interval {
    /// Membership with eigenvalues within [`EIGEN_TOLERANCE`] of `t`
    /// assigned to the closed side.
    pub fn contains(self, t: f64, x: f64) -> bool {
        match self {
            Interval::ClosedUp => x >= t - EIGEN_TOLERANCE,
            Interval::OpenUp => x > t + EIGEN_TOLERANCE,
            Interval::ClosedDown => x <= t + EIGEN_TOLERANCE,
            Interval::OpenDown => x < t - EIGEN_TOLERANCE,
        }
    }
}

/// `E(a; I)`: projection onto the eigenvectors with eigenvalue in `I`.
pub fn spectral_projection(a: &HermitianMatrix, t: f64, kind: Interval) -> Projection {
    let e = a.eigen();
    let cols: Vec<usize> = (0..a.dim()).filter(|&i| kind.contains(t, e.values[i])).collect();
    Projection::from_orthonormal(e.vectors.select_columns(cols.iter()))
}

/// Stepped CDF with a jump of `1/N` at each eigenvalue.
pub fn empirical_spectral_cdf(a: &HermitianMatrix) -> Cdf {
    empirical_cdf(a.eigenvalues()).expect("a matrix has at least one eigenvalue")
}
