//! Real Schur decomposition by Hessenberg reduction and Francis double-shift
//! QR iteration, plus eigenvalue reordering by adjacent block swaps.

use super::{block, max_abs, solve_sylvester, Matrix};
use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

/// `original = U S Uᵀ` with `U` orthogonal and `S` quasi-upper-triangular.
///
/// 2×2 diagonal blocks of `S` always carry a complex-conjugate pair; real
/// pairs are split into 1×1 blocks.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub u: Matrix,
    pub s: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// Which half plane an invariant subspace collects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Select {
    /// `Re λ < 0`
    LeftHalfPlane,
    /// `Re λ > 0`
    RightHalfPlane,
}

impl Select {
    pub fn contains(self, ev: Eigenvalue) -> bool {
        match self {
            Select::LeftHalfPlane => ev.re < 0.0,
            Select::RightHalfPlane => ev.re > 0.0,
        }
    }

    fn boundary_distance(self, ev: Eigenvalue) -> f64 {
        ev.re.abs()
    }
}

impl SchurForm {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// `(start, size)` of every diagonal block.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let size = if i + 1 < n && self.s[(i + 1, i)] != 0.0 {
                2
            } else {
                1
            };
            out.push((i, size));
            i += size;
        }
        out
    }

    /// Eigenvalues in diagonal order; conjugate pairs are listed `+im` first.
    pub fn eigenvalues(&self) -> Vec<Eigenvalue> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, size) in self.blocks() {
            if size == 1 {
                out.push(Eigenvalue {
                    re: self.s[(i, i)],
                    im: 0.0,
                });
            } else {
                let (e1, e2) = block_eigenvalues(&self.s, i);
                out.push(e1);
                out.push(e2);
            }
        }
        out
    }

    /// Moves every eigenvalue accepted by `select` to the leading diagonal
    /// blocks, updating `U` and `S`. Returns how many were selected.
    pub fn reorder(&mut self, select: impl Fn(Eigenvalue) -> bool) -> Result<usize> {
        let n = self.dim();
        let mut target = 0;
        let mut k = 0;
        while k < n {
            let size = self.block_size_at(k);
            let ev = if size == 1 {
                Eigenvalue {
                    re: self.s[(k, k)],
                    im: 0.0,
                }
            } else {
                block_eigenvalues(&self.s, k).0
            };
            if select(ev) {
                let mut here = k;
                let mut moving = size;
                while here > target {
                    let prev = if here >= 2 && self.s[(here - 1, here - 2)] != 0.0 {
                        2
                    } else {
                        1
                    };
                    swap_blocks(&mut self.s, &mut self.u, here - prev, prev, moving)?;
                    here -= prev;
                    moving = self.block_size_at(here);
                }
                target += moving;
            }
            k += size;
        }
        Ok(target)
    }

    fn block_size_at(&self, i: usize) -> usize {
        if i + 1 < self.dim() && self.s[(i + 1, i)] != 0.0 {
            2
        } else {
            1
        }
    }
}

/// Eigenvalues of the 2×2 diagonal block starting at `i`.
fn block_eigenvalues(s: &Matrix, i: usize) -> (Eigenvalue, Eigenvalue) {
    let (a, b, c, d) = (s[(i, i)], s[(i, i + 1)], s[(i + 1, i)], s[(i + 1, i + 1)]);
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    let mean = 0.5 * (a + d);
    if disc < 0.0 {
        let im = (-disc).sqrt();
        (
            Eigenvalue { re: mean, im },
            Eigenvalue { re: mean, im: -im },
        )
    } else {
        let r = disc.sqrt();
        (
            Eigenvalue {
                re: mean + r,
                im: 0.0,
            },
            Eigenvalue {
                re: mean - r,
                im: 0.0,
            },
        )
    }
}

/// Computes the real Schur form of a square matrix.
pub fn real_schur(m: &Matrix) -> Result<SchurForm> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Schur form needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    let mut s = m.clone();
    let mut u = Matrix::identity(n, n);
    if n == 0 {
        return Ok(SchurForm { u, s });
    }
    hessenberg(&mut s, &mut u);
    francis_qr(&mut s, &mut u)?;
    Ok(SchurForm { u, s })
}

/// Eigenvalues of a square matrix via its real Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Eigenvalue>> {
    Ok(real_schur(m)?.eigenvalues())
}

/// Largest real part among the eigenvalues.
pub fn spectral_abscissa(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .map(|e| e.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Orthonormal basis (2n×n) of the invariant subspace of a 2n×2n matrix
/// associated with the eigenvalues in the selected half plane.
pub fn ordered_invariant_subspace(h: &Matrix, select: Select) -> Result<Matrix> {
    let dim = h.nrows();
    if h.ncols() != dim || !dim.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "invariant subspace split needs an even square matrix, got {}x{}",
            dim,
            h.ncols()
        )));
    }
    let half = dim / 2;
    let mut schur = real_schur(h)?;
    let tol = 1e-10 * max_abs(h).max(1.0);
    for ev in schur.eigenvalues() {
        if select.boundary_distance(ev) <= tol {
            return Err(Error::BoundaryEigenvalue {
                re: ev.re,
                im: ev.im,
                tol,
            });
        }
    }
    let found = schur.reorder(|ev| select.contains(ev))?;
    if found != half {
        return Err(Error::SplitMismatch {
            expected: half,
            found,
        });
    }
    Ok(block(&schur.u, 0, 0, dim, half))
}

/// Householder vector `v` (with `v[0]` implicit in the returned array) and
/// `beta` such that `(I - beta v vᵀ) x = ±‖x‖ e₁`.
fn householder<const K: usize>(x: [f64; K]) -> Option<([f64; K], f64)> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x;
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|t| t * t).sum();
    if vv == 0.0 {
        return None;
    }
    Some((v, 2.0 / vv))
}

/// `rows k..k+K` ← `(I - beta v vᵀ) rows`, over columns `c0..n`.
fn reflect_rows<const K: usize>(m: &mut Matrix, k: usize, v: &[f64; K], beta: f64, c0: usize) {
    for j in c0..m.ncols() {
        let mut dot = 0.0;
        for (l, vl) in v.iter().enumerate() {
            dot += vl * m[(k + l, j)];
        }
        let f = beta * dot;
        for (l, vl) in v.iter().enumerate() {
            m[(k + l, j)] -= f * vl;
        }
    }
}

/// `cols k..k+K` ← `cols (I - beta v vᵀ)`, over rows `0..r1`.
fn reflect_cols<const K: usize>(m: &mut Matrix, k: usize, v: &[f64; K], beta: f64, r1: usize) {
    for i in 0..r1 {
        let mut dot = 0.0;
        for (l, vl) in v.iter().enumerate() {
            dot += m[(i, k + l)] * vl;
        }
        let f = beta * dot;
        for (l, vl) in v.iter().enumerate() {
            m[(i, k + l)] -= f * vl;
        }
    }
}

fn hessenberg(h: &mut Matrix, u: &mut Matrix) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<f64> = (0..len).map(|i| h[(k + 1 + i, k)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // left: rows k+1..n, columns k..n
        for j in k..n {
            let dot: f64 = (0..len).map(|i| v[i] * h[(k + 1 + i, j)]).sum();
            let f = beta * dot;
            for i in 0..len {
                h[(k + 1 + i, j)] -= f * v[i];
            }
        }
        // right: all rows, columns k+1..n
        for i in 0..n {
            let dot: f64 = (0..len).map(|l| h[(i, k + 1 + l)] * v[l]).sum();
            let f = beta * dot;
            for l in 0..len {
                h[(i, k + 1 + l)] -= f * v[l];
            }
        }
        for i in 0..n {
            let dot: f64 = (0..len).map(|l| u[(i, k + 1 + l)] * v[l]).sum();
            let f = beta * dot;
            for l in 0..len {
                u[(i, k + 1 + l)] -= f * v[l];
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
}

/// Applies the rotation `G = [[c, -s], [s, c]]` as `Gᵀ H G` on indices
/// `i, i+1` and accumulates `U ← U G`.
fn rotate(h: &mut Matrix, u: &mut Matrix, i: usize, c: f64, s: f64) {
    let n = h.nrows();
    for j in 0..n {
        let a = h[(i, j)];
        let b = h[(i + 1, j)];
        h[(i, j)] = c * a + s * b;
        h[(i + 1, j)] = -s * a + c * b;
    }
    for r in 0..n {
        let a = h[(r, i)];
        let b = h[(r, i + 1)];
        h[(r, i)] = c * a + s * b;
        h[(r, i + 1)] = -s * a + c * b;
    }
    for r in 0..u.nrows() {
        let a = u[(r, i)];
        let b = u[(r, i + 1)];
        u[(r, i)] = c * a + s * b;
        u[(r, i + 1)] = -s * a + c * b;
    }
}

/// Splits a 2×2 diagonal block with real eigenvalues into two 1×1 blocks.
fn standardize_block(h: &mut Matrix, u: &mut Matrix, i: usize) {
    let (a, b, c, d) = (h[(i, i)], h[(i, i + 1)], h[(i + 1, i)], h[(i + 1, i + 1)]);
    if c == 0.0 {
        return;
    }
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc < 0.0 {
        return;
    }
    // eigenvector (λ₁ - d, c) for the eigenvalue farthest from d
    let sign = if p >= 0.0 { 1.0 } else { -1.0 };
    let x0 = p + sign * disc.sqrt();
    let norm = x0.hypot(c);
    rotate(h, u, i, x0 / norm, c / norm);
    h[(i + 1, i)] = 0.0;
}

fn francis_qr(h: &mut Matrix, u: &mut Matrix) -> Result<()> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let fro = h.norm().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            break;
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let mut scale = h[(lo - 1, lo - 1)].abs() + h[(lo, lo)].abs();
            if scale == 0.0 {
                scale = fro;
            }
            if h[(lo, lo - 1)].abs() <= eps * scale {
                h[(lo, lo - 1)] = 0.0;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        if lo + 1 == hi {
            standardize_block(h, u, lo);
            if hi < 2 {
                break;
            }
            hi -= 2;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence { iterations: total });
        }
        let (s, t) = if iter.is_multiple_of(10) {
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            let h11 = 0.75 * w + h[(hi, hi)];
            let h12 = -0.4375 * w;
            (2.0 * h11, h11 * h11 - h12 * w)
        } else {
            let (a, b, c, d) = (
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            (a + d, a * d - b * c)
        };
        francis_step(h, u, lo, hi, s, t);
    }
    Ok(())
}

/// One implicit double-shift sweep on the window `lo..=hi`, shifts given by
/// their sum `s` and product `t`.
fn francis_step(h: &mut Matrix, u: &mut Matrix, lo: usize, hi: usize, s: f64, t: f64) {
    let n = h.nrows();
    let mut x = h[(lo, lo)] * h[(lo, lo)] + h[(lo, lo + 1)] * h[(lo + 1, lo)] - s * h[(lo, lo)] + t;
    let mut y = h[(lo + 1, lo)] * (h[(lo, lo)] + h[(lo + 1, lo + 1)] - s);
    let mut z = h[(lo + 1, lo)] * h[(lo + 2, lo + 1)];
    for k in lo..hi - 1 {
        if let Some((v, beta)) = householder([x, y, z]) {
            let c0 = if k > lo { k - 1 } else { lo };
            reflect_rows(h, k, &v, beta, c0);
            let r1 = (k + 4).min(hi + 1).min(n);
            reflect_cols(h, k, &v, beta, r1);
            reflect_cols(u, k, &v, beta, u.nrows());
            if k > lo {
                h[(k + 1, k - 1)] = 0.0;
                h[(k + 2, k - 1)] = 0.0;
            }
        }
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        if k + 3 <= hi {
            z = h[(k + 3, k)];
        }
    }
    if let Some((v, beta)) = householder([x, y]) {
        let k = hi - 1;
        reflect_rows(h, k, &v, beta, hi - 2);
        reflect_cols(h, k, &v, beta, hi + 1);
        reflect_cols(u, k, &v, beta, u.nrows());
        h[(hi, hi - 2)] = 0.0;
    }
}

/// Full Householder QR of a tall matrix; returns the square orthogonal `Q`.
fn full_q(z: &Matrix) -> Matrix {
    let (rows, cols) = z.shape();
    let mut r = z.clone();
    let mut q = Matrix::identity(rows, rows);
    for c in 0..cols.min(rows - 1) {
        let len = rows - c;
        let x: Vec<f64> = (0..len).map(|i| r[(c + i, c)]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|t| t * t).sum();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        for j in 0..cols {
            let dot: f64 = (0..len).map(|i| v[i] * r[(c + i, j)]).sum();
            for i in 0..len {
                r[(c + i, j)] -= beta * dot * v[i];
            }
        }
        for i in 0..rows {
            let dot: f64 = (0..len).map(|l| q[(i, c + l)] * v[l]).sum();
            for l in 0..len {
                q[(i, c + l)] -= beta * dot * v[l];
            }
        }
    }
    q
}

/// Swaps the adjacent diagonal blocks of sizes `n1` (at `j`) and `n2`
/// (at `j + n1`) by an orthogonal similarity.
fn swap_blocks(t: &mut Matrix, u: &mut Matrix, j: usize, n1: usize, n2: usize) -> Result<()> {
    let n = t.nrows();
    let k = n1 + n2;
    let a11 = block(t, j, j, n1, n1);
    let a22 = block(t, j + n1, j + n1, n2, n2);
    let a12 = block(t, j, j + n1, n1, n2);
    // A11 X - X A22 = A12
    let x = solve_sylvester(&a11, &(-a22), &a12)?;
    let mut z = Matrix::zeros(k, n2);
    z.view_mut((0, 0), (n1, n2)).copy_from(&(-x));
    z.view_mut((n1, 0), (n2, n2)).fill_with_identity();
    let q = full_q(&z);

    let rows = block(t, j, 0, k, n);
    t.view_mut((j, 0), (k, n))
        .copy_from(&(q.transpose() * rows));
    let cols = block(t, 0, j, n, k);
    t.view_mut((0, j), (n, k)).copy_from(&(cols * &q));
    let ucols = block(u, 0, j, u.nrows(), k);
    u.view_mut((0, j), (u.nrows(), k)).copy_from(&(ucols * &q));

    let mut residual = 0.0_f64;
    for r in j + n2..j + k {
        for c in j..j + n2 {
            residual = residual.max(t[(r, c)].abs());
            t[(r, c)] = 0.0;
        }
    }
    let scale = max_abs(t).max(f64::MIN_POSITIVE);
    if residual > 1e-8 * scale {
        return Err(Error::ReorderFailed { residual });
    }
    if n2 == 1 {
        for r in j + 1..j + k {
            t[(r, j)] = 0.0;
        }
    }
    if n2 == 2 {
        standardize_block(t, u, j);
    }
    if n1 == 2 {
        standardize_block(t, u, j + n2);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn check_form(m: &Matrix, f: &SchurForm) {
        let n = m.nrows();
        let ortho = f.u.transpose() * &f.u - Matrix::identity(n, n);
        assert!(
            max_abs(&ortho) <= 1e-12,
            "orthogonality {}",
            max_abs(&ortho)
        );
        let rec = &f.u * &f.s * f.u.transpose() - m;
        assert!(
            max_abs(&rec) <= 1e-10 * max_abs(m).max(f64::MIN_POSITIVE),
            "reconstruction {}",
            max_abs(&rec)
        );
        for (start, size) in f.blocks() {
            for r in start + size..n {
                for c in start..start + size {
                    assert_eq!(f.s[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn identity_is_its_own_schur_form() {
        let m = Matrix::identity(3, 3);
        let f = real_schur(&m).unwrap();
        check_form(&m, &f);
        assert_eq!(f.s, m);
        assert!(f.eigenvalues().iter().all(|e| e.re == 1.0 && e.im == 0.0));
    }

    #[test]
    fn rotation_generator_keeps_complex_block() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let f = real_schur(&m).unwrap();
        check_form(&m, &f);
        assert_eq!(f.blocks(), vec![(0, 2)]);
        let ev = f.eigenvalues();
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im.abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn damped_oscillator_eigenvalues() {
        let r3 = 3f64.sqrt();
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -r3]);
        let ev = eigenvalues(&m).unwrap();
        for e in ev {
            assert!((e.re + r3 / 2.0).abs() < 1e-14);
            assert!((e.im.abs() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn real_pairs_are_split() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let f = real_schur(&m).unwrap();
        check_form(&m, &f);
        assert_eq!(f.blocks().len(), 2);
    }

    #[test]
    fn diagonal_split_picks_stable_axis() {
        let m = Matrix::from_diagonal(&crate::linalg::Vector::from_row_slice(&[1.0, -1.0]));
        let basis = ordered_invariant_subspace(&m, Select::LeftHalfPlane).unwrap();
        assert!((basis[(0, 0)]).abs() < 1e-15);
        assert!((basis[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_four_split() {
        let m = Matrix::from_diagonal(&crate::linalg::Vector::from_row_slice(&[
            -2.0, -1.0, 1.0, 2.0,
        ]));
        let basis = ordered_invariant_subspace(&m, Select::LeftHalfPlane).unwrap();
        for r in 2..4 {
            for c in 0..2 {
                assert!(basis[(r, c)].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_hamiltonian_stable_direction() {
        let h = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = ordered_invariant_subspace(&h, Select::LeftHalfPlane).unwrap();
        assert!((b[(0, 0)] + b[(1, 0)]).abs() < 1e-14);
        assert!((b[(0, 0)].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn split_mismatch_is_reported() {
        let m = Matrix::from_diagonal(&crate::linalg::Vector::from_row_slice(&[
            -2.0, -1.0, -1.5, 2.0,
        ]));
        assert!(matches!(
            ordered_invariant_subspace(&m, Select::LeftHalfPlane),
            Err(Error::SplitMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn axis_eigenvalue_is_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            ordered_invariant_subspace(&m, Select::LeftHalfPlane),
            Err(Error::BoundaryEigenvalue { .. })
        ));
    }

    #[test]
    fn spectral_abscissa_examples() {
        let d = Matrix::from_diagonal(&crate::linalg::Vector::from_row_slice(&[-3.0, -1.0]));
        assert!((spectral_abscissa(&d).unwrap() + 1.0).abs() < 1e-15);
        let rot = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(spectral_abscissa(&rot).unwrap().abs() < 1e-15);
        let r3 = 3f64.sqrt();
        let am = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -r3]);
        assert!((spectral_abscissa(&am).unwrap() + r3 / 2.0).abs() < 1e-14);
    }
}
