//! Exact finite-horizon integrals of quadratic and bilinear forms along
//! linear flows, via exponentials of block-triangular matrices.

use super::{block, block2x2, matrix_exp, norm1, symmetrize, Matrix};
use crate::error::{Error, Result};

/// Number of halvings of `t` needed so that `norm * t / 2^k <= 1`.
fn halvings(norm: f64, t: f64) -> u32 {
    let x = norm * t;
    if x <= 1.0 {
        0
    } else {
        x.log2().ceil() as u32
    }
}

/// `∫₀^T e^{Fᵀs} W e^{Fs} ds`.
///
/// The horizon is split into `2^k` equal pieces so that each block
/// exponential has unit norm; the pieces are then combined by doubling.
pub fn van_loan_integral(f: &Matrix, w: &Matrix, t: f64) -> Result<Matrix> {
    let k = f.nrows();
    if f.ncols() != k || w.shape() != (k, k) {
        return Err(Error::DimensionMismatch(format!(
            "Van Loan integral with F {:?} and W {:?}",
            f.shape(),
            w.shape()
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 || k == 0 {
        return Ok(Matrix::zeros(k, k));
    }
    let splits = halvings(norm1(f), t);
    let tau = t / 2f64.powi(splits as i32);
    let aug = block2x2(&(-f.transpose()), w, &Matrix::zeros(k, k), f) * tau;
    let e = matrix_exp(&aug)?;
    let mut e22 = block(&e, k, k, k, k);
    let mut x = e22.transpose() * block(&e, 0, k, k, k);
    for _ in 0..splits {
        x = &x + e22.transpose() * &x * &e22;
        e22 = &e22 * &e22;
        if !super::is_finite(&x) {
            return Err(Error::Overflow);
        }
    }
    Ok(symmetrize(&x))
}

/// `∫₀^T e^{G(T−t)} K e^{Ht} dt`, the upper-right block of
/// `exp(T [[G, K], [0, H]])`.
pub fn coupled_integral(g: &Matrix, kmat: &Matrix, h: &Matrix, t: f64) -> Result<Matrix> {
    let (p, q) = (g.nrows(), h.nrows());
    if g.ncols() != p || h.ncols() != q || kmat.shape() != (p, q) {
        return Err(Error::DimensionMismatch(format!(
            "coupled integral with G {:?}, K {:?}, H {:?}",
            g.shape(),
            kmat.shape(),
            h.shape()
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be finite and nonnegative, got {t}"
        )));
    }
    if t == 0.0 || p == 0 || q == 0 {
        return Ok(Matrix::zeros(p, q));
    }
    let splits = halvings(norm1(g).max(norm1(h)), t);
    let tau = t / 2f64.powi(splits as i32);
    let aug = block2x2(g, kmat, &Matrix::zeros(q, p), h) * tau;
    let e = matrix_exp(&aug)?;
    let mut eg = block(&e, 0, 0, p, p);
    let mut eh = block(&e, p, p, q, q);
    let mut c = block(&e, 0, p, p, q);
    for _ in 0..splits {
        c = &eg * &c + &c * &eh;
        eg = &eg * &eg;
        eh = &eh * &eh;
        if !super::is_finite(&c) {
            return Err(Error::Overflow);
        }
    }
    Ok(c)
}
