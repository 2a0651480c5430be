use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{check_dims, Projection};
use crate::error::Result;

/// Singular values at or below this (relative to 1, the scale of an
/// orthonormal basis) are treated as zero in rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// `V − W·(Wᵀ·V)`, applied twice for numerical orthogonality.
pub(crate) fn project_out(w: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    if w.ncols() == 0 {
        return v.clone();
    }
    let mut r = v - w * (w.transpose() * v);
    r -= w * (w.transpose() * &r);
    r
}

/// Orthonormal basis of the column span, keeping singular directions with
/// `σ > RANK_TOLERANCE · max(1, σ_max)`.
pub(crate) fn span_basis(v: &DMatrix<f64>) -> DMatrix<f64> {
    let n = v.nrows();
    if v.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = v.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_TOLERANCE * smax)
        .collect();
    u.select_columns(keep.iter())
}

pub(crate) fn orthonormal_span(v: &DMatrix<f64>) -> Projection {
    Projection::from_orthonormal(span_basis(v))
}

/// `P ∨ Q`: projection onto the closed span of both ranges.
pub fn proj_join(p: &Projection, q: &Projection) -> Result<Projection> {
    check_dims(p.dim(), q.dim())?;
    if q.rank() == 0 {
        return Ok(p.clone());
    }
    if p.rank() == 0 {
        return Ok(q.clone());
    }
    if p.rank() < q.rank() {
        return proj_join(q, p);
    }
    // The part of range Q orthogonal to range P has singular values equal to
    // the sines of the principal angles, so the cutoff is on a unit scale.
    let extra = span_basis(&project_out(p.basis(), q.basis()));
    // With a rank-deficient residual the kept singular vectors can be off
    // by ~1e-6; one more projection and QR restore orthonormality.
    let extra = if extra.ncols() == 0 {
        extra
    } else {
        let k = extra.ncols();
        project_out(p.basis(), &extra).qr().q().columns(0, k).into_owned()
    };
    let mut basis = DMatrix::zeros(p.dim(), p.rank() + extra.ncols());
    basis.columns_mut(0, p.rank()).copy_from(p.basis());
    basis.columns_mut(p.rank(), extra.ncols()).copy_from(&extra);
    Ok(Projection::from_orthonormal(basis))
}

/// `P ∧ Q`: projection onto the intersection of the ranges, from the
/// principal vectors with cosine `≥ 1 − RANK_TOLERANCE`.
pub fn proj_meet(p: &Projection, q: &Projection) -> Result<Projection> {
    check_dims(p.dim(), q.dim())?;
    if p.rank() == 0 || q.rank() == 0 {
        return Ok(Projection::zero(p.dim()));
    }
    let m = p.basis().transpose() * q.basis();
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] >= 1.0 - RANK_TOLERANCE)
        .collect();
    if keep.is_empty() {
        return Ok(Projection::zero(p.dim()));
    }
    let dirs = p.basis() * u.select_columns(keep.iter());
    // Re-orthonormalize; the principal vectors are orthonormal up to rounding.
    Ok(Projection::from_orthonormal(
        dirs.qr().q().columns(0, keep.len()).into_owned(),
    ))
}

/// `P ≤ Q`, i.e. range P ⊆ range Q up to [`RANK_TOLERANCE`] on the cosines
/// of the principal angles.
pub fn proj_leq(p: &Projection, q: &Projection) -> Result<bool> {
    check_dims(p.dim(), q.dim())?;
    if p.rank() == 0 {
        return Ok(true);
    }
    if p.rank() > q.rank() {
        return Ok(false);
    }
    let s = (q.basis().transpose() * p.basis()).singular_values();
    Ok(s.min() >= 1.0 - RANK_TOLERANCE)
}

/// Trace identities expected for projections in general position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralPosition {
    pub rank_p: usize,
    pub rank_q: usize,
    pub rank_join: usize,
    pub rank_meet: usize,
    /// `min(rank P + rank Q, N)`
    pub expected_join: usize,
    /// `max(0, rank P + rank Q − N)`
    pub expected_meet: usize,
    /// `|τ(P∨Q) − min(τP+τQ, 1)|`
    pub join_error: f64,
    /// `|τ(P∧Q) − max(0, τP+τQ−1)|`
    pub meet_error: f64,
    pub holds: bool,
}

/// Compares `τ(P∨Q)` and `τ(P∧Q)` with the general-position values.
pub fn general_position_check(p: &Projection, q: &Projection, tol: f64) -> Result<GeneralPosition> {
    let join = proj_join(p, q)?;
    let meet = proj_meet(p, q)?;
    let n = p.dim();
    let sum = p.rank() + q.rank();
    let expected_join = sum.min(n);
    let expected_meet = sum.saturating_sub(n);
    let join_error = (join.rank() as f64 - expected_join as f64).abs() / n as f64;
    let meet_error = (meet.rank() as f64 - expected_meet as f64).abs() / n as f64;
    Ok(GeneralPosition {
        rank_p: p.rank(),
        rank_q: q.rank(),
        rank_join: join.rank(),
        rank_meet: meet.rank(),
        expected_join,
        expected_meet,
        join_error,
        meet_error,
        holds: join_error <= tol && meet_error <= tol,
    })
}
