//! Finite-horizon optimal control: exact solutions through decoupled
//! boundary systems, a direct-transcription oracle and optimality residuals.

mod bvp;
mod transcription;

pub use bvp::{
    free_boundary_weight, solve_bvp_fixed, solve_bvp_free, solve_fixed, solve_free, solve_problem,
    ExactSolution, SolveMethod,
};
pub use transcription::{direct_transcription, Transcription};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{BoundaryData, LqProblem, Regime};

/// Sample times for trajectory output: `samples` uniform points on `[0, T]`
/// plus `refinement` geometrically clustered points next to each end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub samples: usize,
    pub refinement: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            samples: 200,
            refinement: 20,
        }
    }
}

impl GridSpec {
    pub fn uniform(samples: usize) -> Self {
        Self {
            samples,
            refinement: 0,
        }
    }

    pub fn build(&self, horizon: f64) -> Result<Vec<f64>> {
        if self.samples < 2 {
            return Err(Error::GridTooCoarse {
                samples: self.samples,
            });
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let last = (self.samples - 1) as f64;
        let mut grid: Vec<f64> = (0..self.samples)
            .map(|i| horizon * i as f64 / last)
            .collect();
        let h = horizon / last;
        let mut offset = h;
        for _ in 0..self.refinement {
            offset *= 0.5;
            grid.push(offset);
            grid.push(horizon - offset);
        }
        grid.sort_by(|a, b| a.total_cmp(b));
        grid.dedup();
        *grid.last_mut().unwrap() = horizon;
        Ok(grid)
    }
}

/// Sampled optimal triple with the exact optimal cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub y: Vec<Vector>,
    pub u: Vec<Vector>,
    pub lambda: Vec<Vector>,
    pub v_t: f64,
    pub horizon: f64,
    /// `w_T(T) = P(y_T(T) − ȳ) − λ̄` in the free regime.
    pub boundary_weight: Option<Vector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmpResiduals {
    /// `max ‖ẏ − Ay − Bu‖` over interior samples (finite differences).
    pub state: f64,
    /// `max ‖λ̇ + Aᵀλ − Q(y − y_d)‖` over interior samples.
    pub adjoint: f64,
    /// `max ‖u − u_d − R⁻¹Bᵀλ‖` over all samples.
    pub control: f64,
    /// `‖y(0) − y0‖`
    pub initial: f64,
    /// `‖y(T) − y1‖` (fixed) or `‖λ(T)‖` (free).
    pub terminal: f64,
}

/// Three-point derivative on a nonuniform grid at interior index `k`.
fn derivative(grid: &[f64], values: &[Vector], k: usize) -> Vector {
    let h1 = grid[k] - grid[k - 1];
    let h2 = grid[k + 1] - grid[k];
    &values[k - 1] * (-h2 / (h1 * (h1 + h2)))
        + &values[k] * ((h2 - h1) / (h1 * h2))
        + &values[k + 1] * (h1 / (h2 * (h1 + h2)))
}

pub fn pmp_residuals(
    problem: &LqProblem,
    boundary: &BoundaryData,
    traj: &Trajectory,
) -> Result<PmpResiduals> {
    let samples = traj.grid.len();
    if samples < 3 {
        return Err(Error::GridTooCoarse { samples });
    }
    let gain = problem.r_inv()? * problem.b.transpose();
    let mut state = 0.0_f64;
    let mut adjoint = 0.0_f64;
    for k in 1..samples - 1 {
        let dy = derivative(&traj.grid, &traj.y, k);
        let dl = derivative(&traj.grid, &traj.lambda, k);
        let fy = &problem.a * &traj.y[k] + &problem.b * &traj.u[k];
        let fl =
            -(problem.a.transpose() * &traj.lambda[k]) + &problem.q * (&traj.y[k] - &problem.y_d);
        state = state.max((dy - fy).norm());
        adjoint = adjoint.max((dl - fl).norm());
    }
    let control = (0..samples)
        .map(|k| (&traj.u[k] - &problem.u_d - &gain * &traj.lambda[k]).norm())
        .fold(0.0, f64::max);
    let initial = (&traj.y[0] - &boundary.y0).norm();
    let terminal = match (problem.regime, &boundary.y1) {
        (Regime::FixedEndpoints, Some(y1)) => (&traj.y[samples - 1] - y1).norm(),
        _ => traj.lambda[samples - 1].norm(),
    };
    Ok(PmpResiduals {
        state,
        adjoint,
        control,
        initial,
        terminal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_sorted_and_refined() {
        let g = GridSpec::default().build(10.0).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.len(), 200 + 40);
        assert!(g[1] < 1e-6);
    }

    #[test]
    fn coarse_grids_are_rejected() {
        assert!(matches!(
            GridSpec::uniform(1).build(1.0),
            Err(Error::GridTooCoarse { samples: 1 })
        ));
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let grid = vec![0.0, 0.1, 0.35];
        let values: Vec<Vector> = grid
            .iter()
            .map(|t| Vector::from_element(1, 3.0 * t * t - t))
            .collect();
        let d = derivative(&grid, &values, 1);
        assert!((d[0] - (6.0 * 0.1 - 1.0)).abs() < 1e-13);
    }
}
