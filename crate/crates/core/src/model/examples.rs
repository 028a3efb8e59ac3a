use std::f64::consts::PI;

use super::{BoundaryData, LqProblem, Regime};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub const EXAMPLE_NAMES: [&str; 4] = [
    "scalar",
    "double_integrator",
    "oscillator_chain",
    "heat_chain",
];

/// Built-in problems with their default boundary data.
///
/// * `scalar`: `ẏ = u`, target `y_d = 1`, from 3 to 0 over `T = 10`.
/// * `double_integrator`: position/velocity pair driven by force, target
///   `(1, 0)`, from `(2, 0)` to `(1, 1)` over `T = 10`.
/// * `oscillator_chain` (size `k`, default 3): `k` unit masses between two
///   walls coupled by unit springs (finite-difference wave equation, state
///   of dimension `2k`), forces on the first `⌈k/2⌉` masses, from rest to the
///   first string mode over `T = 30`.
/// * `heat_chain` (size `k`, default 5): finite-difference diffusion with
///   an insulated controlled end and a cooled far end, free final state,
///   from 0 toward the uniform profile 1 over `T = 20`.
pub fn builtin_example(name: &str, size: Option<usize>) -> Result<(LqProblem, BoundaryData)> {
    if size == Some(0) {
        return Err(Error::InvalidArgument(
            "example size must be positive".into(),
        ));
    }
    match name {
        "scalar" | "double_integrator" if size.is_some() => Err(Error::InvalidArgument(format!(
            "example `{name}` has a fixed size"
        ))),
        "scalar" => scalar(),
        "double_integrator" => double_integrator(),
        "oscillator_chain" => oscillator_chain(size.unwrap_or(3)),
        "heat_chain" => heat_chain(size.unwrap_or(5)),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

fn scalar() -> Result<(LqProblem, BoundaryData)> {
    let one = Matrix::from_element(1, 1, 1.0);
    let problem = LqProblem::new(
        Matrix::zeros(1, 1),
        one.clone(),
        one.clone(),
        one,
        Vector::from_element(1, 1.0),
        Vector::zeros(1),
        Regime::FixedEndpoints,
    )?;
    let boundary = BoundaryData {
        y0: Vector::from_element(1, 3.0),
        y1: Some(Vector::zeros(1)),
        t: 10.0,
    };
    Ok((problem, boundary))
}

fn double_integrator() -> Result<(LqProblem, BoundaryData)> {
    let problem = LqProblem::new(
        Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::identity(2, 2),
        Matrix::identity(1, 1),
        Vector::from_row_slice(&[1.0, 0.0]),
        Vector::zeros(1),
        Regime::FixedEndpoints,
    )?;
    let boundary = BoundaryData {
        y0: Vector::from_row_slice(&[2.0, 0.0]),
        y1: Some(Vector::from_row_slice(&[1.0, 1.0])),
        t: 10.0,
    };
    Ok((problem, boundary))
}

fn oscillator_chain(k: usize) -> Result<(LqProblem, BoundaryData)> {
    let n = 2 * k;
    let m = k.div_ceil(2);
    let mut a = Matrix::zeros(n, n);
    for i in 0..k {
        a[(i, k + i)] = 1.0;
        a[(k + i, i)] = -2.0;
        if i > 0 {
            a[(k + i, i - 1)] = 1.0;
        }
        if i + 1 < k {
            a[(k + i, i + 1)] = 1.0;
        }
    }
    let mut b = Matrix::zeros(n, m);
    for j in 0..m {
        b[(k + j, j)] = 1.0;
    }
    let y_d = Vector::from_fn(n, |i, _| if i < k { 1.0 } else { 0.0 });
    let problem = LqProblem::new(
        a,
        b,
        Matrix::identity(n, n),
        Matrix::identity(m, m),
        y_d,
        Vector::zeros(m),
        Regime::FixedEndpoints,
    )?;
    let y1 = Vector::from_fn(n, |i, _| {
        if i < k {
            (PI * (i + 1) as f64 / (k + 1) as f64).sin()
        } else {
            0.0
        }
    });
    let boundary = BoundaryData {
        y0: Vector::zeros(n),
        y1: Some(y1),
        t: 30.0,
    };
    Ok((problem, boundary))
}

fn heat_chain(k: usize) -> Result<(LqProblem, BoundaryData)> {
    let mut a = Matrix::zeros(k, k);
    for i in 0..k {
        a[(i, i)] = -2.0;
        if i > 0 {
            a[(i, i - 1)] = 1.0;
        }
        if i + 1 < k {
            a[(i, i + 1)] = 1.0;
        }
    }
    a[(0, 0)] = -1.0;
    let mut b = Matrix::zeros(k, 1);
    b[(0, 0)] = 1.0;
    let problem = LqProblem::new(
        a,
        b,
        Matrix::identity(k, k),
        Matrix::identity(1, 1),
        Vector::from_element(k, 1.0),
        Vector::zeros(1),
        Regime::FreeFinalState,
    )?;
    let boundary = BoundaryData {
        y0: Vector::zeros(k),
        y1: None,
        t: 20.0,
    };
    Ok((problem, boundary))
}
