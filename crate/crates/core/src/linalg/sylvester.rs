use super::{symmetrize, Lu, Matrix, Vector};
use crate::error::{Error, Result};

const MAX_CONDITION: f64 = 1e14;

/// Solves `A X + X B = C` by Kronecker vectorization,
/// `(I ⊗ A + Bᵀ ⊗ I) vec X = vec C`.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    sylvester_below(a, b, c, MAX_CONDITION)
}

fn sylvester_below(a: &Matrix, b: &Matrix, c: &Matrix, max_condition: f64) -> Result<Matrix> {
    let (p, q) = (a.nrows(), b.nrows());
    if a.ncols() != p || b.ncols() != q || c.shape() != (p, q) {
        return Err(Error::DimensionMismatch(format!(
            "Sylvester equation with A {:?}, B {:?}, C {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    let dim = p * q;
    let mut k = Matrix::zeros(dim, dim);
    // column-major vec: X[(i, j)] sits at j * p + i
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for l in 0..p {
                k[(row, j * p + l)] += a[(i, l)];
            }
            for l in 0..q {
                k[(row, l * p + i)] += b[(l, j)];
            }
        }
    }
    let lu = Lu::new(&k)?;
    let condition = lu.condition();
    if !(condition <= max_condition) {
        return Err(Error::SingularSylvester { condition });
    }
    let rhs = Vector::from_column_slice(c.as_slice());
    let x = lu
        .solve(&rhs)
        .map_err(|_| Error::SingularSylvester { condition })?;
    Ok(Matrix::from_column_slice(p, q, x.as_slice()))
}

/// Solves `F X + X Fᵀ + W = 0` for symmetric `W`; the result is symmetrized.
pub fn solve_lyapunov(f: &Matrix, w: &Matrix) -> Result<Matrix> {
    let x = solve_sylvester(f, &f.transpose(), &(-w))?;
    Ok(symmetrize(&x))
}

/// [`solve_lyapunov`] without the condition cutoff, for correction steps
/// whose result is checked by the caller.
pub(crate) fn solve_lyapunov_unchecked(f: &Matrix, w: &Matrix) -> Result<Matrix> {
    let x = sylvester_below(f, &f.transpose(), &(-w), f64::INFINITY)?;
    Ok(symmetrize(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn scalar_lyapunov() {
        let x = solve_lyapunov(
            &Matrix::from_element(1, 1, -1.0),
            &Matrix::from_element(1, 1, 2.0),
        )
        .unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_identity_halves_weight() {
        let q = Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let x = solve_lyapunov(&(-Matrix::identity(2, 2)), &q).unwrap();
        assert!(max_abs(&(x - &q * 0.5)) < 1e-15);
    }

    #[test]
    fn colliding_spectra_are_rejected() {
        let f = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            solve_lyapunov(&f, &Matrix::identity(2, 2)),
            Err(Error::SingularSylvester { .. })
        ));
    }

    #[test]
    fn rectangular_sylvester() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let b = Matrix::from_element(1, 1, 5.0);
        let c = Matrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        assert!(max_abs(&(&a * &x + &x * &b - c)) < 1e-14);
    }
}
