use super::{is_finite, norm1, Lu, Matrix};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13 (Higham 2005).
pub fn matrix_exp(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::Overflow);
    }
    let ident = Matrix::identity(n, n);
    if n == 0 {
        return Ok(ident);
    }
    let norm = norm1(m);
    if norm == 0.0 {
        return Ok(ident);
    }
    let a2 = m * m;
    for &(degree, theta) in THETA.iter() {
        if norm <= theta {
            let (u, v) = match degree {
                3 => odd_even(m, &a2, &B3, &ident),
                5 => odd_even(m, &a2, &B5, &ident),
                7 => odd_even(m, &a2, &B7, &ident),
                _ => odd_even(m, &a2, &B9, &ident),
            };
            return pade_quotient(&u, &v);
        }
    }
    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
    let scale = 0.5_f64.powi(s);
    let a = m * scale;
    let a2 = &a2 * (scale * scale);
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * (b[13]) + &a4 * b[11] + &a2 * b[9];
    let u = &a * (&a6 * &inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * &inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
        if !is_finite(&r) {
            return Err(Error::Overflow);
        }
    }
    Ok(r)
}

/// Odd part `U = A Σ b_{2k+1} A^{2k}` and even part `V = Σ b_{2k} A^{2k}`.
fn odd_even(a: &Matrix, a2: &Matrix, b: &[f64], ident: &Matrix) -> (Matrix, Matrix) {
    let mut odd = ident * b[1];
    let mut even = ident * b[0];
    let mut power = ident.clone();
    let mut k = 2;
    while k < b.len() {
        power = &power * a2;
        even += &power * b[k];
        if k + 1 < b.len() {
            odd += &power * b[k + 1];
        }
        k += 2;
    }
    (a * odd, even)
}

fn pade_quotient(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    let q = v - u;
    let p = v + u;
    let lu = Lu::new(&q)?;
    let r = lu.solve_matrix(&p).map_err(|_| Error::Overflow)?;
    if !is_finite(&r) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, Vector};

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exp(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e, Matrix::identity(3, 3));
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let d = Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, 2.0]));
        let e = matrix_exp(&d).unwrap();
        assert!((e[(0, 0)] - 1f64.exp()).abs() <= 1e-15 * 1f64.exp());
        assert!((e[(1, 1)] - 2f64.exp()).abs() <= 1e-14 * 2f64.exp());
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn nilpotent_series_terminates() {
        for t in [0.001, 0.5, 7.0, 300.0] {
            let m = Matrix::from_row_slice(2, 2, &[0.0, t, 0.0, 0.0]);
            let e = matrix_exp(&m).unwrap();
            let expect = Matrix::from_row_slice(2, 2, &[1.0, t, 0.0, 1.0]);
            assert!(max_abs(&(e - expect)) <= 1e-13 * t.max(1.0));
        }
    }

    #[test]
    fn rotation_is_periodic() {
        let pi = std::f64::consts::PI;
        let m = Matrix::from_row_slice(2, 2, &[0.0, 2.0 * pi, -2.0 * pi, 0.0]);
        let e = matrix_exp(&m).unwrap();
        assert!(max_abs(&(e - Matrix::identity(2, 2))) < 1e-13);
    }

    #[test]
    fn huge_growth_overflows() {
        let m = Matrix::from_row_slice(1, 1, &[1000.0]);
        assert_eq!(matrix_exp(&m), Err(Error::Overflow));
    }
}
