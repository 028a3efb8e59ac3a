use super::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{BandLu, BandMatrix, Matrix, Vector};
use crate::model::LqProblem;

/// Result of the discretized problem: approximate cost and node values.
#[derive(Debug, Clone)]
pub struct Transcription {
    pub cost: f64,
    pub trajectory: Trajectory,
    pub steps: usize,
}

/// Implicit-midpoint transcription of the optimal control problem, solved
/// through the KKT system of the resulting equality-constrained QP.
///
/// Unknowns are ordered stage by stage as `[y_k, u_k, p_k]` followed by
/// `y_N`, which keeps the KKT matrix banded. `p_k` is the multiplier of the
/// `k`-th dynamics constraint and approximates `λ` at the stage midpoint.
/// `y1 = None` leaves the final state free.
pub fn direct_transcription(
    problem: &LqProblem,
    y0: &Vector,
    y1: Option<&Vector>,
    horizon: f64,
    steps: usize,
) -> Result<Transcription> {
    if steps < 10 {
        return Err(Error::InvalidArgument(format!(
            "at least 10 steps are required, got {steps}"
        )));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    problem.check_dimensions()?;
    let n = problem.n();
    let m = problem.m();
    if y0.len() != n || y1.is_some_and(|y| y.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "boundary states must have length {n}"
        )));
    }
    let s = 2 * n + m;
    let dim = steps * s + n;
    let h = horizon / steps as f64;
    let ident = Matrix::identity(n, n);
    let left = &ident - &problem.a * (0.5 * h); // I − hA/2
    let right = &ident + &problem.a * (0.5 * h); // I + hA/2
    let q = &problem.q;
    let qy_d = q * &problem.y_d;
    let ru_d = &problem.r * &problem.u_d;

    let band = s + n;
    let mut kkt = BandMatrix::zeros(dim, band, band);
    let mut rhs = Vector::zeros(dim);
    let y_at = |k: usize| k * s;
    let u_at = |k: usize| k * s + n;
    let p_at = |k: usize| k * s + n + m;

    for i in 0..n {
        kkt.add(i, i, 1.0);
        rhs[i] = y0[i];
    }
    for k in 1..steps {
        let row = y_at(k);
        for i in 0..n {
            for j in 0..n {
                kkt.add(row + i, y_at(k - 1) + j, 0.25 * q[(i, j)]);
                kkt.add(row + i, y_at(k) + j, 0.5 * q[(i, j)]);
                kkt.add(row + i, y_at(k + 1) + j, 0.25 * q[(i, j)]);
                kkt.add(row + i, p_at(k - 1) + j, left[(j, i)] / h);
                kkt.add(row + i, p_at(k) + j, -right[(j, i)] / h);
            }
            rhs[row + i] = qy_d[i];
        }
    }
    let last = y_at(steps);
    match y1 {
        Some(y1) => {
            for i in 0..n {
                kkt.add(last + i, last + i, 1.0);
                rhs[last + i] = y1[i];
            }
        }
        None => {
            for i in 0..n {
                for j in 0..n {
                    kkt.add(last + i, y_at(steps - 1) + j, 0.25 * q[(i, j)]);
                    kkt.add(last + i, last + j, 0.25 * q[(i, j)]);
                    kkt.add(last + i, p_at(steps - 1) + j, left[(j, i)] / h);
                }
                rhs[last + i] = 0.5 * qy_d[i];
            }
        }
    }
    for k in 0..steps {
        for i in 0..m {
            for j in 0..m {
                kkt.add(u_at(k) + i, u_at(k) + j, problem.r[(i, j)]);
            }
            for j in 0..n {
                kkt.add(u_at(k) + i, p_at(k) + j, -problem.b[(j, i)]);
            }
            rhs[u_at(k) + i] = ru_d[i];
        }
        for i in 0..n {
            for j in 0..n {
                kkt.add(p_at(k) + i, y_at(k + 1) + j, left[(i, j)] / h);
                kkt.add(p_at(k) + i, y_at(k) + j, -right[(i, j)] / h);
            }
            for j in 0..m {
                kkt.add(p_at(k) + i, u_at(k) + j, -problem.b[(i, j)]);
            }
        }
    }

    let x = BandLu::new(&kkt)?.solve(&rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularQp);
    }
    let y: Vec<Vector> = (0..=steps)
        .map(|k| x.rows(y_at(k), n).into_owned())
        .collect();
    let u_stage: Vec<Vector> = (0..steps)
        .map(|k| x.rows(u_at(k), m).into_owned())
        .collect();
    let p_stage: Vec<Vector> = (0..steps)
        .map(|k| x.rows(p_at(k), n).into_owned())
        .collect();

    let cost = h
        * (0..steps)
            .map(|k| problem.running_cost(&((&y[k] + &y[k + 1]) * 0.5), &u_stage[k]))
            .sum::<f64>();

    let grid = (0..=steps)
        .map(|k| horizon * k as f64 / steps as f64)
        .collect();
    Ok(Transcription {
        cost,
        trajectory: Trajectory {
            grid,
            y,
            u: to_nodes(&u_stage),
            lambda: to_nodes(&p_stage),
            v_t: cost,
            horizon,
            boundary_weight: None,
        },
        steps,
    })
}

/// Stage (midpoint) values to node values: averages inside, linear
/// extrapolation at both ends.
fn to_nodes(stage: &[Vector]) -> Vec<Vector> {
    let k = stage.len();
    let mut nodes = Vec::with_capacity(k + 1);
    nodes.push(&stage[0] * 1.5 - &stage[1] * 0.5);
    for i in 1..k {
        nodes.push((&stage[i - 1] + &stage[i]) * 0.5);
    }
    nodes.push(&stage[k - 1] * 1.5 - &stage[k - 2] * 0.5);
    nodes
}
