//! Small dense complex linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `a^H b` without allocating.
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Cholesky factorization of a Hermitian matrix. On failure a diagonal jitter of
/// `1e-10 * trace / n` is added once before giving up.
pub fn cholesky_with_jitter(a: CMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    let n = a.nrows();
    if let Some(c) = Cholesky::new(a.clone()) {
        return Ok(c);
    }
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    let jitter = 1e-10 * trace.abs().max(f64::MIN_POSITIVE) / n.max(1) as f64;
    log::warn!("hermitian factorization failed, adding jitter {jitter:.3e}");
    let mut b = a;
    for i in 0..n {
        b[(i, i)] += jitter;
    }
    Cholesky::new(b).ok_or_else(|| Error::Singular(format!("{n}x{n} hermitian system")))
}

/// Columns `idx` of `phi` stacked into a new matrix.
pub fn select_columns(phi: &CMatrix, idx: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(phi.nrows(), idx.len());
    for (j, &l) in idx.iter().enumerate() {
        out.set_column(j, &phi.column(l));
    }
    out
}

/// `Phi^H v` for every column: the correlation of `v` with the whole dictionary.
pub fn correlate(phi: &CMatrix, v: &CVector) -> CVector {
    phi.ad_mul(v)
}

/// Least-squares solution of `min ||y - A x||` via a thin QR.
/// Returns `None` if `A` is numerically rank deficient.
pub fn least_squares(a: &CMatrix, y: &CVector) -> Option<CVector> {
    let k = a.ncols();
    if k == 0 {
        return Some(CVector::zeros(0));
    }
    if k > a.nrows() {
        return None;
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let rmax = (0..k).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].norm() <= 1e-10 * rmax.max(f64::MIN_POSITIVE)) {
        return None;
    }
    let qty = qr.q().ad_mul(y);
    r.solve_upper_triangular(&qty)
}

/// Normwise relative difference `||a - b|| / max(||b||, floor)`.
pub fn rel_diff(a: &[Complex64], b: &[Complex64], floor: f64) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    num / norm_sqr(b).sqrt().max(floor)
}
