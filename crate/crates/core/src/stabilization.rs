//! Forward and backward stabilization values around the turnpike and their
//! dissipative forms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{coupled_integral, matrix_exp, van_loan_integral, Matrix, Vector};
use crate::model::LqProblem;
use crate::riccati::RiccatiPair;
use crate::static_turnpike::StaticSolution;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationValues {
    pub s_f: f64,
    pub s_b: Option<f64>,
    /// `⟨λ̄, y0 − ȳ⟩`
    pub lambda_y0: f64,
    /// `⟨λ̄, y1 − ȳ⟩`
    pub lambda_y1: Option<f64>,
    pub v_f: f64,
    pub v_b: Option<f64>,
}

/// `½⟨P(y0 − ȳ), y0 − ȳ⟩`
pub fn forward_value(p: &Matrix, y_bar: &Vector, y0: &Vector) -> f64 {
    let z = y0 - y_bar;
    0.5 * z.dot(&(p * &z))
}

/// `−½⟨N(y1 − ȳ), y1 − ȳ⟩`
pub fn backward_value(n: &Matrix, y_bar: &Vector, y1: &Vector) -> f64 {
    let z = y1 - y_bar;
    -0.5 * z.dot(&(n * &z))
}

/// `V_f = S_f − ⟨λ̄, y0 − ȳ⟩` and `V_b = S_b + ⟨λ̄, y1 − ȳ⟩`.
pub fn dissipative_values(
    s_f: f64,
    s_b: Option<f64>,
    lambda_bar: &Vector,
    y_bar: &Vector,
    y0: &Vector,
    y1: Option<&Vector>,
) -> (f64, Option<f64>) {
    let v_f = s_f - lambda_bar.dot(&(y0 - y_bar));
    let v_b = match (s_b, y1) {
        (Some(s_b), Some(y1)) => Some(s_b + lambda_bar.dot(&(y1 - y_bar))),
        _ => None,
    };
    (v_f, v_b)
}

pub fn stabilization_values(
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y0: &Vector,
    y1: Option<&Vector>,
) -> StabilizationValues {
    let y_bar = static_solution.y();
    let lambda_bar = static_solution.lambda();
    let s_f = forward_value(&riccati.p, &y_bar, y0);
    let s_b = match (&riccati.n, y1) {
        (Some(n), Some(y1)) => Some(backward_value(n, &y_bar, y1)),
        _ => None,
    };
    let (v_f, v_b) = dissipative_values(s_f, s_b, &lambda_bar, &y_bar, y0, y1);
    StabilizationValues {
        s_f,
        s_b,
        lambda_y0: lambda_bar.dot(&(y0 - &y_bar)),
        lambda_y1: y1.map(|y1| lambda_bar.dot(&(y1 - &y_bar))),
        v_f,
        v_b,
    }
}

/// Optimal trajectories of the shifted stabilization problems at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedTrajectories {
    /// `e^{tA₋}(y0 − ȳ)`
    pub z_f: Vector,
    /// `−R⁻¹BᵀP z_f`
    pub v_f: Vector,
    /// `e^{−tA₊}(y1 − ȳ)`
    pub z_b: Option<Vector>,
    /// `−R⁻¹BᵀN z_b`
    pub v_b: Option<Vector>,
}

pub fn shifted_trajectories(
    problem: &LqProblem,
    riccati: &RiccatiPair,
    dy0: &Vector,
    dy1: Option<&Vector>,
    t: f64,
) -> Result<ShiftedTrajectories> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let gain = problem.r_inv()? * problem.b.transpose();
    let z_f = matrix_exp(&(&riccati.a_minus * t))? * dy0;
    let v_f = -(&gain * &riccati.p * &z_f);
    let (z_b, v_b) = match (&riccati.a_plus, &riccati.n, dy1) {
        (Some(a_plus), Some(n), Some(dy1)) => {
            let z_b = matrix_exp(&(a_plus * (-t)))? * dy1;
            let v_b = -(&gain * n * &z_b);
            (Some(z_b), Some(v_b))
        }
        _ => (None, None),
    };
    Ok(ShiftedTrajectories { z_f, v_f, z_b, v_b })
}

/// `∫₀^{t_cut}` of the running cost minus `V̄` along the closed-loop forward
/// trajectory `y = ȳ + e^{tA₋}(y0 − ȳ)`, `u = ū − R⁻¹BᵀP(y − ȳ)`, in closed
/// form. Tends to `V_f` as `t_cut → ∞`.
pub fn forward_dissipation_integral(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y0: &Vector,
    t_cut: f64,
) -> Result<f64> {
    let gain = problem.r_inv()? * problem.b.transpose() * &riccati.p;
    loop_dissipation(
        problem,
        static_solution,
        &riccati.a_minus,
        &gain,
        &(y0 - static_solution.y()),
        t_cut,
    )
}

/// The backward counterpart along `y = ȳ + e^{−tA₊}(y1 − ȳ)`,
/// `u = ū − R⁻¹BᵀN(y − ȳ)`. Tends to `V_b` as `t_cut → ∞`.
pub fn backward_dissipation_integral(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y1: &Vector,
    t_cut: f64,
) -> Result<f64> {
    let (Some(a_plus), Some(n)) = (&riccati.a_plus, &riccati.n) else {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    };
    let gain = problem.r_inv()? * problem.b.transpose() * n;
    loop_dissipation(
        problem,
        static_solution,
        &(-a_plus),
        &gain,
        &(y1 - static_solution.y()),
        t_cut,
    )
}

/// Closed-form `∫₀^{t_cut} [ℓ(ȳ + z, ū − Kz) − V̄] dt` with `z = e^{tF}z₀`.
fn loop_dissipation(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    f: &Matrix,
    gain: &Matrix,
    z0: &Vector,
    t_cut: f64,
) -> Result<f64> {
    let weight = &problem.q + gain.transpose() * &problem.r * gain;
    let quadratic = 0.5 * z0.dot(&(van_loan_integral(f, &weight, t_cut)? * z0));
    let n = problem.n();
    // ∫₀^{t_cut} e^{tF} dt
    let flow = coupled_integral(&Matrix::zeros(n, n), &Matrix::identity(n, n), f, t_cut)?;
    let z_int = flow * z0;
    let v_int = -(gain * &z_int);
    let y_gap = &problem.q * (static_solution.y() - &problem.y_d);
    let u_gap = &problem.r * (static_solution.u() - &problem.u_d);
    Ok(quadratic + y_gap.dot(&z_int) + u_gap.dot(&v_int))
}

/// Quadratic cost `½∫₀^{t_cut}(‖z‖²_Q + ‖Kz‖²_R)` of the deviation dynamics
/// `ż = (A − BK)z` from `z₀`.
pub fn feedback_cost(problem: &LqProblem, gain: &Matrix, z0: &Vector, t_cut: f64) -> Result<f64> {
    let f = &problem.a - &problem.b * gain;
    let weight = &problem.q + gain.transpose() * &problem.r * gain;
    Ok(0.5 * z0.dot(&(van_loan_integral(&f, &weight, t_cut)? * z0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;
    use crate::riccati::solve_riccati;
    use crate::static_turnpike::solve_static;

    #[test]
    fn scalar_values() {
        let one = Matrix::from_element(1, 1, 1.0);
        let y_bar = Vector::from_element(1, 1.0);
        assert_eq!(
            forward_value(&one, &y_bar, &Vector::from_element(1, 3.0)),
            2.0
        );
        assert_eq!(backward_value(&(-one), &y_bar, &Vector::zeros(1)), 0.5);
        assert_eq!(
            forward_value(&Matrix::from_element(1, 1, 5.0), &y_bar, &y_bar),
            0.0
        );
    }

    #[test]
    fn double_integrator_values() {
        let (p, b) = builtin_example("double_integrator", None).unwrap();
        let st = solve_static(&p).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let v = stabilization_values(&st, &pair, &b.y0, b.y1.as_ref());
        let h = 3f64.sqrt() / 2.0;
        assert!((v.s_f - h).abs() < 1e-10);
        assert!((v.s_b.unwrap() - h).abs() < 1e-10);
        assert_eq!(v.v_f, v.s_f);
    }

    #[test]
    fn scalar_shifted_trajectories() {
        let (p, _) = builtin_example("scalar", None).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let dy0 = Vector::from_element(1, 2.0);
        let t = 0.7;
        let s = shifted_trajectories(&p, &pair, &dy0, Some(&dy0), t).unwrap();
        assert!((s.z_f[0] - 2.0 * (-t).exp()).abs() < 1e-14);
        assert!((s.v_f[0] + 2.0 * (-t).exp()).abs() < 1e-14);
        let s0 = shifted_trajectories(&p, &pair, &dy0, None, 0.0).unwrap();
        assert_eq!(s0.z_f, dy0);
        assert!(s0.z_b.is_none());
    }

    #[test]
    fn dissipative_forms() {
        let l = Vector::from_row_slice(&[1.0, -2.0]);
        let yb = Vector::from_row_slice(&[0.5, 0.5]);
        let (vf, vb) = dissipative_values(1.0, Some(2.0), &l, &yb, &yb, Some(&yb));
        assert_eq!((vf, vb), (1.0, Some(2.0)));
        let y0 = Vector::from_row_slice(&[1.5, 0.5]);
        let (vf, _) = dissipative_values(1.0, None, &l, &yb, &y0, None);
        assert_eq!(vf, 0.0);
    }
}
