//! Stabilizing and anti-stabilizing solutions of
//! `AᵀX + XA − XBR⁻¹BᵀX + Q = 0`, the closed-loop generators they induce,
//! and the Lyapunov operator of the free-endpoint problem.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_horizon::free_boundary_weight;
use crate::linalg::{
    block, block2x2, eigenvalues, max_abs, ordered_invariant_subspace, riccati_residual,
    solve_lyapunov, solve_lyapunov_unchecked, spectral_abscissa, symmetrize, Eigenvalue, Lu,
    Matrix, Select, Vector,
};
use crate::model::{LqProblem, Regime};
use crate::static_turnpike::StaticSolution;
use crate::tolerances::Tolerances;

const NEWTON_STEPS: usize = 8;

/// `P`, `N` and the closed-loop data derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiPair {
    pub p: Matrix,
    pub n: Option<Matrix>,
    /// `A − BR⁻¹BᵀP`
    pub a_minus: Matrix,
    /// `A − BR⁻¹BᵀN`
    pub a_plus: Option<Matrix>,
    /// `P − N`
    pub delta: Option<Matrix>,
    pub nu: f64,
}

/// A Riccati solution with the residual after the invariant-subspace step
/// and after each accepted Newton–Kleinman step.
#[derive(Debug, Clone, PartialEq)]
pub struct AreSolution {
    pub x: Matrix,
    pub residual_history: Vec<f64>,
}

/// `[[A, −BR⁻¹Bᵀ], [−Q, −Aᵀ]]`
pub fn hamiltonian(problem: &LqProblem) -> Result<Matrix> {
    Ok(block2x2(
        &problem.a,
        &(-problem.s()?),
        &(-&problem.q),
        &(-problem.a.transpose()),
    ))
}

/// `AᵀX + XA − XBR⁻¹BᵀX + Q`
pub fn are_residual(problem: &LqProblem, x: &Matrix) -> Result<Matrix> {
    Ok(riccati_residual(&problem.a, &problem.s()?, &problem.q, x))
}

fn residual_norm(problem: &LqProblem, x: &Matrix) -> Result<f64> {
    Ok(max_abs(&are_residual(problem, x)?))
}

fn graph_solution(problem: &LqProblem, select: Select) -> Result<AreSolution> {
    problem.check_dimensions()?;
    let n = problem.n();
    let h = hamiltonian(problem)?;
    let basis = ordered_invariant_subspace(&h, select).map_err(|e| match e {
        Error::BoundaryEigenvalue { re, im, .. } => Error::HamiltonianAxisEigenvalue { re, im },
        other => other,
    })?;
    let x1 = block(&basis, 0, 0, n, n);
    let x2 = block(&basis, n, 0, n, n);
    // X = X₂ X₁⁻¹, i.e. X₁ᵀ Xᵀ = X₂ᵀ
    let lu = Lu::new(&x1.transpose())?;
    let condition = lu.condition();
    if !(condition < 1e12) {
        return Err(Error::SubspaceSingular { condition });
    }
    let x = symmetrize(&lu.solve_matrix(&x2.transpose())?.transpose());
    let first = residual_norm(problem, &x)?;
    let mut solution = AreSolution {
        x,
        residual_history: vec![first],
    };
    newton_kleinman(problem, &mut solution)?;
    Ok(solution)
}

/// Newton–Kleinman refinement in correction form: with `F = A − SX` the
/// step `δ` solves `Fᵀδ + δF + R(X) = 0`, `R` the Riccati residual. Runs a
/// fixed number of steps from the last iterate and keeps an iterate only if
/// it lowers the residual.
fn newton_kleinman(problem: &LqProblem, solution: &mut AreSolution) -> Result<()> {
    let s = problem.s()?;
    let mut x = solution.x.clone();
    let mut residual = are_residual(problem, &x)?;
    for _ in 0..NEWTON_STEPS {
        let f = &problem.a - &s * &x;
        let step = match solve_lyapunov_unchecked(&f.transpose(), &residual) {
            Ok(step) => step,
            Err(Error::SingularSylvester { .. }) => break,
            Err(e) => return Err(e),
        };
        x = symmetrize(&(&x + step));
        residual = are_residual(problem, &x)?;
        let res = max_abs(&residual);
        if !res.is_finite() {
            break;
        }
        if res < *solution.residual_history.last().unwrap() {
            solution.x = x.clone();
            solution.residual_history.push(res);
        }
    }
    Ok(())
}

/// Stabilizing solution `P` with its residual history.
pub fn stabilizing_solution(problem: &LqProblem) -> Result<AreSolution> {
    graph_solution(problem, Select::LeftHalfPlane)
}

/// Anti-stabilizing solution `N` with its residual history.
pub fn antistabilizing_solution(problem: &LqProblem) -> Result<AreSolution> {
    graph_solution(problem, Select::RightHalfPlane)
}

pub fn solve_are_stabilizing(problem: &LqProblem) -> Result<Matrix> {
    Ok(stabilizing_solution(problem)?.x)
}

pub fn solve_are_antistabilizing(problem: &LqProblem) -> Result<Matrix> {
    if problem.regime != Regime::FixedEndpoints {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    }
    Ok(antistabilizing_solution(problem)?.x)
}

/// Builds `A₋`, `A₊`, `Δ` and `ν` from `P` and, when given, `N`.
pub fn closed_loop(problem: &LqProblem, p: &Matrix, n: Option<&Matrix>) -> Result<RiccatiPair> {
    let s = problem.s()?;
    let a_minus = &problem.a - &s * p;
    let decay_minus = -spectral_abscissa(&a_minus)?;
    let Some(n) = n else {
        return Ok(RiccatiPair {
            p: p.clone(),
            n: None,
            a_minus,
            a_plus: None,
            delta: None,
            nu: decay_minus,
        });
    };
    let a_plus = &problem.a - &s * n;
    let delta = symmetrize(&(p - n));
    let residual = max_abs(&(&delta * &a_minus + a_plus.transpose() * &delta));
    let scale = max_abs(&delta) * max_abs(&a_minus).max(max_abs(&a_plus)).max(1.0);
    if !(residual <= 1e-8 * scale.max(1.0)) {
        return Err(Error::IntertwiningViolation { residual });
    }
    let decay_plus = -spectral_abscissa(&(-&a_plus))?;
    Ok(RiccatiPair {
        p: p.clone(),
        n: Some(n.clone()),
        a_minus,
        a_plus: Some(a_plus),
        delta: Some(delta),
        nu: decay_minus.min(decay_plus),
    })
}

/// `P` (and `N` in the fixed regime) with the closed-loop data.
pub fn solve_riccati(problem: &LqProblem) -> Result<RiccatiPair> {
    let p = solve_are_stabilizing(problem)?;
    match problem.regime {
        Regime::FixedEndpoints => {
            let n = solve_are_antistabilizing(problem)?;
            closed_loop(problem, &p, Some(&n))
        }
        Regime::FreeFinalState => closed_loop(problem, &p, None),
    }
}

/// Largest distance between the spectrum of `A₋` and the negated spectrum
/// of `A₊`, matching eigenvalues greedily.
pub fn spectral_mirror_gap(pair: &RiccatiPair) -> Result<Option<f64>> {
    let Some(a_plus) = &pair.a_plus else {
        return Ok(None);
    };
    let minus = eigenvalues(&pair.a_minus)?;
    let mut plus: Vec<Eigenvalue> = eigenvalues(&(-a_plus))?;
    let mut worst = 0.0_f64;
    for e in minus {
        let (idx, dist) = plus
            .iter()
            .enumerate()
            .map(|(i, f)| (i, (e.re - f.re).hypot(e.im - f.im)))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        worst = worst.max(dist);
        plus.swap_remove(idx);
    }
    Ok(Some(worst))
}

/// How `w_∞` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitSource {
    /// Solved from `(I + PE) w = −λ̄`.
    Direct,
    /// Read off the settled sequence `w_T(T)` along growing horizons.
    Sequence,
}

/// Data of the free-endpoint expansion: `E`, `I + PE` and `w_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEndpointAux {
    pub e: Matrix,
    pub i_plus_pe: Matrix,
    pub w_inf: Vector,
    pub ipe_condition: f64,
    pub source: LimitSource,
}

pub fn free_endpoint_aux(
    problem: &LqProblem,
    riccati: &RiccatiPair,
    static_solution: &StaticSolution,
) -> Result<FreeEndpointAux> {
    free_endpoint_aux_with(problem, riccati, static_solution, &Tolerances::default())
}

pub fn free_endpoint_aux_with(
    problem: &LqProblem,
    riccati: &RiccatiPair,
    static_solution: &StaticSolution,
    tol: &Tolerances,
) -> Result<FreeEndpointAux> {
    if problem.regime != Regime::FreeFinalState {
        return Err(Error::RegimeMismatch { expected: "free" });
    }
    let n = problem.n();
    let s = problem.s()?;
    let e = solve_lyapunov(&riccati.a_minus, &(-s))?;
    let i_plus_pe = Matrix::identity(n, n) + &riccati.p * &e;
    let lu = Lu::new(&i_plus_pe)?;
    let ipe_condition = lu.condition();
    let lambda_bar = static_solution.lambda();
    if ipe_condition < tol.ipe_condition {
        let w_inf = lu.solve(&(-&lambda_bar))?;
        return Ok(FreeEndpointAux {
            e,
            i_plus_pe,
            w_inf,
            ipe_condition,
            source: LimitSource::Direct,
        });
    }
    // w_T(T) along T = 8/ν · 1.5^k until successive values settle
    let y0 = static_solution.y();
    let mut previous: Option<Vector> = None;
    let mut horizon = 8.0 / riccati.nu;
    for _ in 0..12 {
        let w = free_boundary_weight(
            problem,
            static_solution,
            riccati,
            &e,
            &i_plus_pe,
            &y0,
            horizon,
            tol,
        )?;
        if let Some(prev) = &previous {
            if (&w - prev).amax() <= 1e-10 * (1.0 + w.amax()) {
                return Ok(FreeEndpointAux {
                    e,
                    i_plus_pe,
                    w_inf: w,
                    ipe_condition,
                    source: LimitSource::Sequence,
                });
            }
        }
        previous = Some(w);
        horizon *= 1.5;
    }
    Err(Error::IllConditionedIpe {
        condition: ipe_condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;

    #[test]
    fn scalar_pair() {
        let (p, _) = builtin_example("scalar", None).unwrap();
        let pair = solve_riccati(&p).unwrap();
        assert!((pair.p[(0, 0)] - 1.0).abs() < 1e-14);
        let n = pair.n.as_ref().unwrap();
        assert!((n[(0, 0)] + 1.0).abs() < 1e-14);
        assert!((pair.a_minus[(0, 0)] + 1.0).abs() < 1e-14);
        assert!((pair.a_plus.as_ref().unwrap()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((pair.delta.as_ref().unwrap()[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((pair.nu - 1.0).abs() < 1e-14);
    }

    #[test]
    fn double_integrator_pair() {
        let (p, _) = builtin_example("double_integrator", None).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let r3 = 3f64.sqrt();
        let expect_p = Matrix::from_row_slice(2, 2, &[r3, 1.0, 1.0, r3]);
        let expect_n = Matrix::from_row_slice(2, 2, &[-r3, 1.0, 1.0, -r3]);
        assert!(max_abs(&(&pair.p - expect_p)) < 1e-10);
        assert!(max_abs(&(pair.n.as_ref().unwrap() - expect_n)) < 1e-10);
        assert!((pair.nu - r3 / 2.0).abs() < 1e-10);
        assert!(spectral_mirror_gap(&pair).unwrap().unwrap() < 1e-7);
    }

    #[test]
    fn zero_weight_on_stable_dynamics() {
        let p = LqProblem::new(
            Matrix::from_row_slice(2, 2, &[-1.0, 3.0, 0.0, -2.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
            Matrix::zeros(2, 2),
            Matrix::identity(1, 1),
            Vector::zeros(2),
            Vector::zeros(1),
            Regime::FreeFinalState,
        )
        .unwrap();
        let x = solve_are_stabilizing(&p).unwrap();
        assert!(max_abs(&x) < 1e-14);
    }

    #[test]
    fn axis_eigenvalue_is_reported() {
        // undamped, unobserved oscillator: Hamiltonian eigenvalues ±i
        let p = LqProblem::new(
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 0.0]),
            Matrix::zeros(2, 2),
            Matrix::identity(1, 1),
            Vector::zeros(2),
            Vector::zeros(1),
            Regime::FreeFinalState,
        )
        .unwrap();
        assert!(matches!(
            solve_are_stabilizing(&p),
            Err(Error::HamiltonianAxisEigenvalue { .. })
        ));
    }

    #[test]
    fn residual_history_never_increases() {
        let (p, _) = builtin_example("oscillator_chain", Some(4)).unwrap();
        for sol in [
            stabilizing_solution(&p).unwrap(),
            antistabilizing_solution(&p).unwrap(),
        ] {
            for w in sol.residual_history.windows(2) {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn anti_stabilizing_needs_fixed_regime() {
        let (p, _) = builtin_example("heat_chain", None).unwrap();
        assert!(matches!(
            solve_are_antistabilizing(&p),
            Err(Error::RegimeMismatch { expected: "fixed" })
        ));
    }
}
