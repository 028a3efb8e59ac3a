//! Twice-working-precision matrix products from error-free transformations.

use super::Matrix;

/// `a + b = s + e` exactly.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `a·b = p + e` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Running sum carried as an unevaluated pair `hi + lo`.
#[derive(Clone, Copy, Default)]
struct Acc {
    hi: f64,
    lo: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    fn add_prod(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.lo += e;
    }

    fn split(self) -> (f64, f64) {
        two_sum(self.hi, self.lo)
    }
}

/// `AB` as `hi + lo`.
fn product(a: &Matrix, b: &Matrix) -> (Matrix, Matrix) {
    let mut hi = Matrix::zeros(a.nrows(), b.ncols());
    let mut lo = hi.clone();
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = Acc::default();
            for k in 0..a.ncols() {
                acc.add_prod(a[(i, k)], b[(k, j)]);
            }
            (hi[(i, j)], lo[(i, j)]) = acc.split();
        }
    }
    (hi, lo)
}

/// `AᵀX + XA − XSX + Q` evaluated as if in twice the working precision,
/// then rounded once.
pub fn riccati_residual(a: &Matrix, s: &Matrix, q: &Matrix, x: &Matrix) -> Matrix {
    let n = a.nrows();
    let (sx_hi, sx_lo) = product(s, x);
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Acc::default();
            acc.add(q[(i, j)]);
            for k in 0..n {
                acc.add_prod(a[(k, i)], x[(k, j)]);
                acc.add_prod(x[(i, k)], a[(k, j)]);
                acc.add_prod(-x[(i, k)], sx_hi[(k, j)]);
                acc.add_prod(-x[(i, k)], sx_lo[(k, j)]);
            }
            out[(i, j)] = acc.split().0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_recovered() {
        // (1 + 2⁻³⁰)² − 1 − 2⁻²⁹ = 2⁻⁶⁰, lost entirely in plain arithmetic
        let e = 2f64.powi(-30);
        let a = Matrix::from_element(1, 1, 1.0 + e);
        let b = a.clone();
        let (hi, lo) = product(&a, &b);
        let mut acc = Acc {
            hi: hi[(0, 0)],
            lo: lo[(0, 0)],
        };
        acc.add(-1.0);
        acc.add(-2.0 * e);
        assert_eq!(acc.split().0, e * e);
    }

    #[test]
    fn matches_plain_residual_on_small_data() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.5]);
        let s = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let q = Matrix::identity(2, 2);
        let x = Matrix::from_row_slice(2, 2, &[1.5, 0.25, 0.25, 0.75]);
        let plain = a.transpose() * &x + &x * &a - &x * &s * &x + &q;
        let accurate = riccati_residual(&a, &s, &q, &x);
        assert!((plain - accurate).amax() < 1e-15);
    }
}
