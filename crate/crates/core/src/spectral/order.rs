use nalgebra::DMatrix;

use super::lattice::{project_out, proj_leq, span_basis};
use super::{check_dims, spectral_projection, HermitianMatrix, Interval, EIGEN_TOLERANCE};
use crate::error::Result;

/// Distinct values of both spectra, descending, with values closer than
/// [`EIGEN_TOLERANCE`] merged into the larger one.
fn merged_levels(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| y.total_cmp(x));
    let mut levels: Vec<f64> = Vec::new();
    for x in all {
        match levels.last() {
            Some(&l) if l - x <= EIGEN_TOLERANCE => {}
            _ => levels.push(x),
        }
    }
    levels
}

/// Pushes eigenvector indices of `a` (from the top, starting below
/// `*taken`) whose eigenvalue is `≥ level − EIGEN_TOLERANCE`.
fn take_down_to(a: &HermitianMatrix, level: f64, taken: &mut usize, cols: &mut Vec<usize>) {
    let v = a.spectrum();
    while *taken < v.len() && v[v.len() - 1 - *taken] >= level - EIGEN_TOLERANCE {
        cols.push(v.len() - 1 - *taken);
        *taken += 1;
    }
}

/// Spectral maximum `a ∨ b`: the self-adjoint matrix whose upper spectral
/// projections are `E(a∨b; (t,∞)) = E(a; (t,∞)) ∨ E(b; (t,∞))`.
///
/// The levels of `a∨b` lie in the union of both spectra. Going down the
/// levels, the new directions of the running join receive the current
/// level as eigenvalue.
pub fn spectral_max(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(a.dim(), b.dim())?;
    let n = a.dim();
    let levels = merged_levels(a.spectrum(), b.spectrum());
    let mut basis = DMatrix::<f64>::zeros(n, 0);
    let mut values: Vec<f64> = Vec::with_capacity(n);
    let (mut ta, mut tb) = (0, 0);
    for &level in &levels {
        if basis.ncols() == n {
            break;
        }
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        take_down_to(a, level, &mut ta, &mut ca);
        take_down_to(b, level, &mut tb, &mut cb);
        let mut cand = DMatrix::zeros(n, ca.len() + cb.len());
        for (j, &i) in ca.iter().enumerate() {
            cand.set_column(j, &a.eigenvectors().column(i));
        }
        for (j, &i) in cb.iter().enumerate() {
            cand.set_column(ca.len() + j, &b.eigenvectors().column(i));
        }
        let fresh = span_basis(&project_out(&basis, &cand));
        let take = fresh.ncols().min(n - basis.ncols());
        if take == 0 {
            continue;
        }
        let old = basis.ncols();
        basis = basis.resize_horizontally(old + take, 0.0);
        basis.columns_mut(old, take).copy_from(&fresh.columns(0, take));
        values.extend(std::iter::repeat(level).take(take));
    }
    debug_assert_eq!(basis.ncols(), n);
    HermitianMatrix::from_spectral(&values, basis)
}

/// Spectral minimum `a ∧ b = −((−a) ∨ (−b))`.
pub fn spectral_min(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(spectral_max(&a.neg(), &b.neg())?.neg())
}

/// Spectral order `a ≺ b`: `E(a; [t,∞)) ≤ E(b; [t,∞))` for every `t`.
///
/// Both families are constant between consecutive points of the union of
/// the spectra, so checking the closed projections at those points covers
/// every `t`.
pub fn spectral_leq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<bool> {
    check_dims(a.dim(), b.dim())?;
    for t in merged_levels(a.spectrum(), b.spectrum()) {
        let pa = spectral_projection(a, t, Interval::ClosedUp);
        let pb = spectral_projection(b, t, Interval::ClosedUp);
        if !proj_leq(&pa, &pb)? {
            return Ok(false);
        }
    }
    Ok(true)
}
