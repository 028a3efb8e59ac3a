use super::{norm1, Matrix, Vector};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: Matrix,
    perm: Vec<usize>,
    norm1: f64,
    original: Matrix,
}

impl Lu {
    /// Factors a square matrix. Exactly zero pivots are reported as
    /// `Err(InvalidArgument)`; callers usually want [`Lu::condition`] instead.
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self {
            norm1: norm1(a),
            factors: lu,
            perm,
            original: a.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.nrows()
    }

    pub fn is_singular(&self) -> bool {
        (0..self.dim()).any(|k| self.factors[(k, k)] == 0.0)
    }

    fn solve_raw(&self, b: &Vector) -> Vector {
        let n = self.dim();
        let mut x = Vector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.factors[(i, j)] * x[j];
            }
            x[i] = s / self.factors[(i, i)];
        }
        x
    }

    fn solve_transpose_raw(&self, b: &Vector) -> Vector {
        // Aᵀ = Uᵀ Lᵀ P
        let n = self.dim();
        let mut z = b.clone();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.factors[(j, i)] * z[j];
            }
            z[i] = s / self.factors[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.factors[(j, i)] * z[j];
            }
            z[i] = s;
        }
        let mut x = Vector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = z[i];
        }
        x
    }

    /// Solves `A x = b` followed by one step of iterative refinement.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if self.is_singular() {
            return Err(Error::InvalidArgument("singular matrix".into()));
        }
        let mut x = self.solve_raw(b);
        let r = b - &self.original * &x;
        x += self.solve_raw(&r);
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(b.nrows(), b.ncols());
        for (j, col) in b.column_iter().enumerate() {
            let x = self.solve(&col.into_owned())?;
            out.set_column(j, &x);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve_matrix(&Matrix::identity(self.dim(), self.dim()))
    }

    /// 1-norm condition number estimate (Hager/Higham power method on
    /// `A⁻¹`). Returns infinity for exactly singular factors.
    pub fn condition(&self) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 1.0;
        }
        if self.is_singular() {
            return f64::INFINITY;
        }
        let mut x = Vector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_raw(&x);
            let new_est: f64 = y.iter().map(|v| v.abs()).sum();
            if !new_est.is_finite() {
                return f64::INFINITY;
            }
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose_raw(&xi);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0_f64), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
            let zx = z.dot(&x);
            if new_est <= est || zmax <= zx {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x = Vector::zeros(n);
            x[jmax] = 1.0;
        }
        // Higham's alternating-sign safeguard
        let alt = Vector::from_fn(n, |i, _| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        });
        let y = self.solve_raw(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        self.norm1 * est.max(alt_est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let b = Vector::from_row_slice(&[1.0, 2.0, 3.0]);
        let lu = Lu::new(&a).unwrap();
        let x = lu.solve(&b).unwrap();
        assert!((&a * &x - &b).amax() < 1e-14);
    }

    #[test]
    fn condition_tracks_exact_value() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-8]);
        let c = Lu::new(&a).unwrap().condition();
        assert!((c / 1e8 - 1.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn singular_matrix_has_infinite_condition() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let lu = Lu::new(&a).unwrap();
        assert!(lu.condition() > 1e15);
    }
}
