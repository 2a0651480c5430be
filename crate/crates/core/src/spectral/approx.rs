//! Monotone approximations of `a ∨ b` by `(½(aᵖ + bᵖ))^{1/p}` and
//! `p⁻¹·log(e^{pa} + e^{pb})`.
//!
//! Both are functions of a positive sum `S = Σ_j e^{2s_j} v_j v_jᵀ` whose
//! weights span hundreds of orders of magnitude at large `p`. `S = Y·Yᵀ`
//! with columns `y_j = e^{s_j} v_j`, and a one-sided Jacobi iteration
//! orthogonalizes those columns while keeping every scale as a logarithm,
//! so no weight is ever exponentiated. At convergence the surviving columns
//! are eigenvectors of `S` with log-eigenvalues `2s_j`.

use nalgebra::{DMatrix, DVector};

use super::lattice::{project_out, span_basis, RANK_TOLERANCE};
use super::{check_dims, HermitianMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-14;

struct Column {
    s: f64,
    v: DVector<f64>,
}

/// Rotates the pair so that `e^{s_b} v_b ⟂ e^{s_s} v_s`, with `s_b ≥ s_s`.
/// A column that collapses below the rank tolerance is reported dead
/// (`false`): it was dependent on its partner.
fn rotate(big: &mut Column, small: &mut Column, g: f64) -> (bool, bool) {
    let d = big.s - small.s;
    let e2 = (-2.0 * d).exp();
    let zeta = (e2 - 1.0) / (2.0 * g);
    let sign = if zeta < 0.0 { -1.0 } else { 1.0 };
    let tau = sign / (zeta.abs() + (e2 + zeta * zeta).sqrt());
    let t = tau * (-d).exp();
    let c = 1.0 / (1.0 + t * t).sqrt();
    let wb = (&big.v - &small.v * (tau * e2)) * c;
    let ws = (&big.v * tau + &small.v) * c;
    let renorm = |col: &mut Column, w: DVector<f64>| {
        let nw = w.norm();
        if nw <= RANK_TOLERANCE {
            false
        } else {
            col.s += nw.ln();
            col.v = w / nw;
            true
        }
    };
    (renorm(big, wb), renorm(small, ws))
}

/// Orthogonalizes the columns `e^{s_j} v_j`; returns the surviving ones.
fn log_gram_orthogonalize(mut cols: Vec<Column>) -> Result<Vec<Column>> {
    for _ in 0..MAX_SWEEPS {
        cols.sort_by(|x, y| y.s.total_cmp(&x.s));
        let mut alive = vec![true; cols.len()];
        let start: Vec<f64> = cols.iter().map(|c| c.s).collect();
        let mut rotated = false;
        for i in 0..cols.len() {
            for j in (i + 1)..cols.len() {
                if !alive[i] || !alive[j] {
                    continue;
                }
                let g = cols[i].v.dot(&cols[j].v);
                if g.abs() <= ORTHO_TOL {
                    continue;
                }
                rotated = true;
                let (lo, hi) = cols.split_at_mut(j);
                let (ci, cj) = (&mut lo[i], &mut hi[0]);
                let (ki, kj) = if ci.s >= cj.s {
                    rotate(ci, cj, g)
                } else {
                    let (kj, ki) = rotate(cj, ci, g);
                    (ki, kj)
                };
                alive[i] = ki;
                alive[j] = kj;
            }
        }
        // A dependent column loses its mass over several rotations; one that
        // shrank below the rank tolerance within a sweep is dropped.
        for (j, c) in cols.iter().enumerate() {
            if c.s - start[j] < RANK_TOLERANCE.ln() {
                alive[j] = false;
            }
        }
        cols = cols
            .into_iter()
            .zip(alive)
            .filter_map(|(c, a)| a.then_some(c))
            .collect();
        if !rotated {
            return Ok(cols);
        }
    }
    Err(Error::Numerical(format!(
        "log-scale Jacobi did not converge in {MAX_SWEEPS} sweeps"
    )))
}

/// Builds `Σ f(2s_j) v_j v_jᵀ`, completing the basis with eigenvalue
/// `fill` on the orthogonal complement.
fn assemble(cols: &[Column], f: impl Fn(f64) -> f64, fill: f64, n: usize) -> Result<HermitianMatrix> {
    let mut basis = DMatrix::zeros(n, cols.len());
    let mut values: Vec<f64> = cols.iter().map(|c| f(2.0 * c.s)).collect();
    for (j, c) in cols.iter().enumerate() {
        basis.set_column(j, &c.v);
    }
    if !cols.is_empty() {
        // Re-orthonormalize against rounding left by the last sweep.
        let qr = basis.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        for j in 0..cols.len() {
            let sign = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
            basis.column_mut(j).copy_from(&(q.column(j) * sign));
        }
    }
    if cols.len() < n {
        let rest = span_basis(&project_out(&basis, &DMatrix::identity(n, n)));
        if rest.ncols() + cols.len() != n {
            return Err(Error::Numerical(format!(
                "complement has dimension {} instead of {}",
                rest.ncols(),
                n - cols.len()
            )));
        }
        basis = basis.resize_horizontally(n, 0.0);
        basis.columns_mut(cols.len(), rest.ncols()).copy_from(&rest);
        values.resize(n, fill);
    }
    HermitianMatrix::from_spectral(&values, basis)
}

fn spectral_columns(a: &HermitianMatrix, log_weight: impl Fn(f64) -> Option<f64>) -> Vec<Column> {
    let vecs = a.eigenvectors();
    a.spectrum()
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            log_weight(x).map(|lw| Column {
                s: 0.5 * lw,
                v: vecs.column(i).into_owned(),
            })
        })
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("p", format!("exponent {p} must be a finite real ≥ 1")))
    }
}

/// `(½(aᵖ + bᵖ))^{1/p}`, increasing in `p` towards `a ∨ b` for `a, b ≥ 0`.
///
/// With `shift`, both inputs are moved by `c = max(0, −λ_min) + 1` first
/// and the result is moved back, which approximates `a ∨ b` for any pair.
/// Without it a negative spectrum is an error.
pub fn pnorm_approx(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    p: f64,
    shift: bool,
) -> Result<HermitianMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_p(p)?;
    let lmin = a.spectrum()[0].min(b.spectrum()[0]);
    if shift {
        let c = (-lmin).max(0.0) + 1.0;
        return Ok(pnorm_approx(&a.shifted(c), &b.shifted(c), p, false)?.shifted(-c));
    }
    let scale = a.matrix().amax().max(b.matrix().amax()).max(1.0);
    if lmin < -1e-12 * scale {
        return Err(Error::invalid(
            "a, b",
            format!("minimum eigenvalue {lmin:e} is negative; use the shift option"),
        ));
    }
    let lw = |x: f64| (x > 0.0).then(|| p * x.ln() - std::f64::consts::LN_2);
    let mut cols = spectral_columns(a, lw);
    cols.extend(spectral_columns(b, lw));
    let cols = log_gram_orthogonalize(cols)?;
    if cols.len() > a.dim() {
        return Err(Error::Numerical("more independent directions than the dimension".into()));
    }
    assemble(&cols, |l| (l / p).exp(), 0.0, a.dim())
}

/// `p⁻¹·log(e^{pa} + e^{pb})`, within `log 2 / p` of `a ∨ b`.
pub fn logexp_approx(a: &HermitianMatrix, b: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    check_dims(a.dim(), b.dim())?;
    check_p(p)?;
    // Subtracting the top eigenvalue m keeps every log-weight ≤ 0.
    let m = a.spectrum()[a.dim() - 1].max(b.spectrum()[b.dim() - 1]);
    let lw = |x: f64| Some(p * (x - m));
    let mut cols = spectral_columns(a, lw);
    cols.extend(spectral_columns(b, lw));
    let cols = log_gram_orthogonalize(cols)?;
    if cols.len() != a.dim() {
        return Err(Error::Numerical(format!(
            "exp(pa) + exp(pb) resolved into {} directions instead of {} (p = {p})",
            cols.len(),
            a.dim()
        )));
    }
    assemble(&cols, |l| m + l / p, 0.0, a.dim())
}
