//! The static problem `min ½(‖y − y_d‖²_Q + ‖u − u_d‖²_R)` subject to
//! `Ay + Bu = 0`, solved through its KKT system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{block2x2, stack, Lu, Matrix, Vector};
use crate::model::{LqProblem, Regime};
use crate::tolerances::Tolerances;

/// Turnpike triple `(ȳ, ū, λ̄)` and static value `V̄`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticSolution {
    pub y_bar: Vec<f64>,
    pub u_bar: Vec<f64>,
    pub lambda_bar: Vec<f64>,
    pub v_bar: f64,
    /// False when the multiplier is only determined up to a null space
    /// (semidefinite `Q`); `lambda_bar` is then the minimum-norm choice.
    pub multiplier_unique: bool,
    /// 1-norm condition estimate of the KKT matrix.
    pub kkt_condition: f64,
}

impl StaticSolution {
    pub fn y(&self) -> Vector {
        Vector::from_column_slice(&self.y_bar)
    }

    pub fn u(&self) -> Vector {
        Vector::from_column_slice(&self.u_bar)
    }

    pub fn lambda(&self) -> Vector {
        Vector::from_column_slice(&self.lambda_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktResiduals {
    /// `‖Aȳ + Bū‖`
    pub feasibility: f64,
    /// `‖Q(ȳ − y_d) − Aᵀλ̄‖`
    pub adjoint: f64,
    /// `‖R(ū − u_d) − Bᵀλ̄‖`
    pub control: f64,
}

/// `M = [[A, BR⁻¹Bᵀ], [Q, −Aᵀ]]`
pub fn kkt_matrix(problem: &LqProblem) -> Result<Matrix> {
    Ok(block2x2(
        &problem.a,
        &problem.s()?,
        &problem.q,
        &(-problem.a.transpose()),
    ))
}

pub fn solve_static(problem: &LqProblem) -> Result<StaticSolution> {
    solve_static_with(problem, &Tolerances::default())
}

pub fn solve_static_with(problem: &LqProblem, tol: &Tolerances) -> Result<StaticSolution> {
    problem.check_dimensions()?;
    let n = problem.n();
    let m = kkt_matrix(problem)?;
    let lu = Lu::new(&m)?;
    let condition = lu.condition();
    if condition <= tol.kkt_condition {
        let rhs = stack(
            &(-(&problem.b * &problem.u_d)),
            &(&problem.q * &problem.y_d),
        );
        let x = lu.solve(&rhs)?;
        let y_bar = x.rows(0, n).into_owned();
        let lambda_bar = x.rows(n, n).into_owned();
        let u_bar = &problem.u_d + problem.r_inv()? * problem.b.transpose() * &lambda_bar;
        return Ok(assemble(problem, y_bar, u_bar, lambda_bar, true, condition));
    }
    match problem.regime {
        Regime::FixedEndpoints => Err(Error::SingularKkt { condition }),
        Regime::FreeFinalState => null_space_solve(problem, condition, tol),
    }
}

fn assemble(
    problem: &LqProblem,
    y_bar: Vector,
    u_bar: Vector,
    lambda_bar: Vector,
    multiplier_unique: bool,
    kkt_condition: f64,
) -> StaticSolution {
    let v_bar = problem.running_cost(&y_bar, &u_bar);
    StaticSolution {
        y_bar: y_bar.as_slice().to_vec(),
        u_bar: u_bar.as_slice().to_vec(),
        lambda_bar: lambda_bar.as_slice().to_vec(),
        v_bar,
        multiplier_unique,
        kkt_condition,
    }
}

/// Orthonormal basis of the null space of `c`, from the eigenvectors of
/// `cᵀc` with (relatively) negligible eigenvalues.
pub(crate) fn null_space(c: &Matrix, rel_tol: f64) -> Matrix {
    let k = c.ncols();
    let eig = (c.transpose() * c).symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<usize> = (0..k)
        .filter(|&i| eig.eigenvalues[i] <= rel_tol * top.max(f64::MIN_POSITIVE))
        .collect();
    Matrix::from_fn(k, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])])
}

/// Equality-constrained least squares over `{Ay + Bu = 0}` by null-space
/// parametrization; the multiplier is the minimum-norm least-squares
/// solution of `[Aᵀ; Bᵀ] λ = [Q(ȳ − y_d); R(ū − u_d)]`.
fn null_space_solve(
    problem: &LqProblem,
    condition: f64,
    tol: &Tolerances,
) -> Result<StaticSolution> {
    let n = problem.n();
    let mm = problem.m();
    let mut c = Matrix::zeros(n, n + mm);
    c.view_mut((0, 0), (n, n)).copy_from(&problem.a);
    c.view_mut((0, n), (n, mm)).copy_from(&problem.b);
    let z = null_space(&c, 1e-12);
    let mut w = Matrix::zeros(n + mm, n + mm);
    w.view_mut((0, 0), (n, n)).copy_from(&problem.q);
    w.view_mut((n, n), (mm, mm)).copy_from(&problem.r);
    let target = stack(&problem.y_d, &problem.u_d);
    let h = z.transpose() * &w * &z;
    let g = z.transpose() * &w * &target;
    let xi = h
        .svd(true, true)
        .solve(&g, 1e-13)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let x = &z * xi;
    let y_bar = x.rows(0, n).into_owned();
    let u_bar = x.rows(n, mm).into_owned();
    let rhs = stack(
        &(&problem.q * (&y_bar - &problem.y_d)),
        &(&problem.r * (&u_bar - &problem.u_d)),
    );
    let ct = c.transpose();
    let svd = ct.clone().svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > tol.rank_tol * top)
        .count();
    let lambda_bar = svd
        .solve(&rhs, tol.rank_tol * top)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(assemble(
        problem,
        y_bar,
        u_bar,
        lambda_bar,
        rank == n,
        condition,
    ))
}

pub fn kkt_residuals(problem: &LqProblem, candidate: &StaticSolution) -> KktResiduals {
    let y = candidate.y();
    let u = candidate.u();
    let l = candidate.lambda();
    KktResiduals {
        feasibility: (&problem.a * &y + &problem.b * &u).norm(),
        adjoint: (&problem.q * (&y - &problem.y_d) - problem.a.transpose() * &l).norm(),
        control: (&problem.r * (&u - &problem.u_d) - problem.b.transpose() * &l).norm(),
    }
}

/// `−½⟨Ay_d + Bu_d, λ̄⟩`, an alternative expression of `V̄`.
pub fn static_value_from_multiplier(problem: &LqProblem, solution: &StaticSolution) -> f64 {
    -0.5 * (&problem.a * &problem.y_d + &problem.b * &problem.u_d).dot(&solution.lambda())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;

    #[test]
    fn scalar_turnpike_is_the_target() {
        let (p, _) = builtin_example("scalar", None).unwrap();
        let s = solve_static(&p).unwrap();
        assert!((s.y_bar[0] - 1.0).abs() < 1e-15);
        assert_eq!(s.u_bar[0], 0.0);
        assert_eq!(s.lambda_bar[0], 0.0);
        assert_eq!(s.v_bar, 0.0);
    }

    #[test]
    fn perturbed_double_integrator_target() {
        let (mut p, _) = builtin_example("double_integrator", None).unwrap();
        p.y_d = Vector::from_row_slice(&[1.0, 1.0]);
        let s = solve_static(&p).unwrap();
        // feasible set is {(y₁, 0, 0)}: the optimum sits at y₁ = 1 with cost ½
        assert!((s.y_bar[0] - 1.0).abs() < 1e-14);
        assert!(s.y_bar[1].abs() < 1e-14);
        assert!(s.u_bar[0].abs() < 1e-14);
        assert!((s.v_bar - 0.5).abs() < 1e-14);
        assert!((static_value_from_multiplier(&p, &s) - s.v_bar).abs() < 1e-14);
        let r = kkt_residuals(&p, &s);
        assert!(r.feasibility < 1e-14 && r.adjoint < 1e-14 && r.control < 1e-14);
    }

    #[test]
    fn residuals_are_linear_in_the_multiplier() {
        let (mut p, _) = builtin_example("double_integrator", None).unwrap();
        p.y_d = Vector::from_row_slice(&[1.0, 1.0]);
        let mut s = solve_static(&p).unwrap();
        let delta = Vector::from_row_slice(&[0.25, -0.5]);
        s.lambda_bar[0] += delta[0];
        s.lambda_bar[1] += delta[1];
        let r = kkt_residuals(&p, &s);
        assert!((r.adjoint - (p.a.transpose() * &delta).norm()).abs() < 1e-14);
    }

    #[test]
    fn infeasible_target_candidate() {
        let (mut p, _) = builtin_example("double_integrator", None).unwrap();
        p.y_d = Vector::from_row_slice(&[1.0, 1.0]);
        let candidate = StaticSolution {
            y_bar: vec![1.0, 1.0],
            u_bar: vec![0.0],
            lambda_bar: vec![0.0, 0.0],
            v_bar: 0.0,
            multiplier_unique: true,
            kkt_condition: 1.0,
        };
        let r = kkt_residuals(&p, &candidate);
        assert_eq!(r.feasibility, 1.0);
    }

    #[test]
    fn singular_kkt_in_fixed_regime() {
        // uncontrolled integrator mode: M has a zero row block
        let p = LqProblem::new(
            Matrix::zeros(2, 2),
            Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
            Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, 0.0])),
            Matrix::identity(1, 1),
            Vector::zeros(2),
            Vector::zeros(1),
            Regime::FixedEndpoints,
        )
        .unwrap();
        assert!(matches!(solve_static(&p), Err(Error::SingularKkt { .. })));
    }

    #[test]
    fn semidefinite_fallback_flags_non_unique_multiplier() {
        let p = LqProblem::new(
            Matrix::zeros(2, 2),
            Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
            Matrix::from_diagonal(&Vector::from_row_slice(&[1.0, 0.0])),
            Matrix::identity(1, 1),
            Vector::from_row_slice(&[2.0, 5.0]),
            Vector::zeros(1),
            Regime::FreeFinalState,
        )
        .unwrap();
        let s = solve_static(&p).unwrap();
        assert!(!s.multiplier_unique);
        assert!((s.y_bar[0] - 2.0).abs() < 1e-12);
        assert!(s.u_bar[0].abs() < 1e-12);
        assert!(s.v_bar.abs() < 1e-12);
        let r = kkt_residuals(&p, &s);
        assert!(r.feasibility < 1e-12 && r.adjoint < 1e-12 && r.control < 1e-12);
    }
}
