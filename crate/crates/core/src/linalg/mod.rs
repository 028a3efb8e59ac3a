//! Dense numerical kernels: LU with condition estimation, real Schur
//! form with eigenvalue reordering, the matrix exponential, Lyapunov and
//! Sylvester solvers, closed-form quadratic integrals of linear flows and a
//! banded LU used by the transcription oracle.

mod band;
mod compensated;
mod expm;
mod integrals;
mod lu;
mod schur;
mod sylvester;

pub use band::{BandLu, BandMatrix};
pub use compensated::riccati_residual;
pub use expm::matrix_exp;
pub use integrals::{coupled_integral, van_loan_integral};
pub use lu::Lu;
pub use schur::{
    eigenvalues, ordered_invariant_subspace, real_schur, spectral_abscissa, Eigenvalue, SchurForm,
    Select,
};
pub(crate) use sylvester::solve_lyapunov_unchecked;
pub use sylvester::{solve_lyapunov, solve_sylvester};

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// (M + Mᵀ) / 2
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Max-abs asymmetry of a square matrix.
pub fn asymmetry(m: &Matrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Maximum absolute column sum.
pub fn norm1(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Copy of the `rows × cols` block starting at `(r0, c0)`.
pub(crate) fn block(m: &Matrix, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
    m.view((r0, c0), (rows, cols)).into_owned()
}

/// Assembles `[[a, b], [c, d]]`.
pub(crate) fn block2x2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    let mut out = Matrix::zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a);
    out.view_mut((0, c1), (r1, c2)).copy_from(b);
    out.view_mut((r1, 0), (r2, c1)).copy_from(c);
    out.view_mut((r1, c1), (r2, c2)).copy_from(d);
    out
}

pub(crate) fn stack(top: &Vector, bottom: &Vector) -> Vector {
    let mut out = Vector::zeros(top.len() + bottom.len());
    out.rows_mut(0, top.len()).copy_from(top);
    out.rows_mut(top.len(), bottom.len()).copy_from(bottom);
    out
}

pub(crate) fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|x| x.is_finite())
}
