use serde::Serialize;

use super::{GridSpec, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{
    block, block2x2, coupled_integral, matrix_exp, stack, van_loan_integral, Lu, Matrix, Vector,
};
use crate::model::{LqProblem, Regime};
use crate::riccati::{FreeEndpointAux, RiccatiPair};
use crate::static_turnpike::{kkt_matrix, StaticSolution};
use crate::tolerances::Tolerances;

/// Below this `νT` the boundary value problem is shot directly with `e^{TM}`.
const SHOOTING_BELOW: f64 = 0.5;
/// Above this `νT` the coupling blocks `e^{TA₋}`, `e^{−TA₊}` are dropped.
const TRUNCATE_ABOVE: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    /// Decoupled stable/antistable coordinates, full boundary system.
    Decoupled,
    /// Decoupled coordinates with the exponentially small coupling dropped.
    Truncated,
    /// Fundamental matrix of the extremal system.
    Shooting,
}

#[derive(Debug, Clone)]
enum Flow {
    /// `δy = v + w`, `δλ = −Nv − Pw`, `v(t) = e^{−(T−t)A₊}v_T`, `w(t) = e^{tA₋}w₀`.
    Fixed {
        a_minus: Matrix,
        a_plus: Matrix,
        p: Matrix,
        n: Matrix,
        w0: Vector,
        v_t: Vector,
    },
    /// `δy = v − Ew`, `δλ = −Pv + (I + PE)w`, `v(t) = e^{tA₋}v₀`,
    /// `w(t) = e^{(T−t)A₋ᵀ}w_T`.
    Free {
        a_minus: Matrix,
        p: Matrix,
        e: Matrix,
        ipe: Matrix,
        v0: Vector,
        w_t: Vector,
    },
    /// `(δy, δλ)(t) = e^{tM}(δy₀, δλ₀)`.
    Shooting { m: Matrix, z0: Vector },
}

/// Exact optimal solution of one finite-horizon problem, evaluable at any
/// time, together with its optimal cost.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    regime: Regime,
    horizon: f64,
    cost: f64,
    method: SolveMethod,
    condition: f64,
    y_bar: Vector,
    lambda_bar: Vector,
    u_d: Vector,
    gain: Matrix,
    p: Matrix,
    flow: Flow,
}

impl ExactSolution {
    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Optimal cost `V_T`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    /// Condition estimate of the boundary system that was solved.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// `(y_T(t) − ȳ, λ_T(t) − λ̄)`
    pub fn deviation(&self, t: f64) -> Result<(Vector, Vector)> {
        let t = t.clamp(0.0, self.horizon);
        let big_t = self.horizon;
        Ok(match &self.flow {
            Flow::Fixed {
                a_minus,
                a_plus,
                p,
                n,
                w0,
                v_t,
            } => {
                let v = matrix_exp(&(a_plus * (t - big_t)))? * v_t;
                let w = matrix_exp(&(a_minus * t))? * w0;
                (&v + &w, -(n * &v) - p * &w)
            }
            Flow::Free {
                a_minus,
                p,
                e,
                ipe,
                v0,
                w_t,
            } => {
                let v = matrix_exp(&(a_minus * t))? * v0;
                let w = matrix_exp(&(a_minus.transpose() * (big_t - t)))? * w_t;
                (&v - e * &w, -(p * &v) + ipe * &w)
            }
            Flow::Shooting { m, z0 } => {
                let z = matrix_exp(&(m * t))? * z0;
                let n = z.len() / 2;
                (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
            }
        })
    }

    /// `(y_T(t), λ_T(t))`
    pub fn state_costate(&self, t: f64) -> Result<(Vector, Vector)> {
        let (dy, dl) = self.deviation(t)?;
        Ok((dy + &self.y_bar, dl + &self.lambda_bar))
    }

    /// `u = u_d + R⁻¹Bᵀλ`
    pub fn control(&self, lambda: &Vector) -> Vector {
        &self.u_d + &self.gain * lambda
    }

    /// `w_T(T) = P(y_T(T) − ȳ) + λ_T(T) − λ̄`
    pub fn boundary_weight(&self) -> Result<Vector> {
        if let Flow::Free { w_t, .. } = &self.flow {
            return Ok(w_t.clone());
        }
        let (dy, dl) = self.deviation(self.horizon)?;
        Ok(&self.p * dy + dl)
    }

    /// `(w₀, v_T)` in the fixed regime, `(v₀, w_T)` in the free regime.
    pub fn boundary_coordinates(&self) -> Option<(Vector, Vector)> {
        match &self.flow {
            Flow::Fixed { w0, v_t, .. } => Some((w0.clone(), v_t.clone())),
            Flow::Free { v0, w_t, .. } => Some((v0.clone(), w_t.clone())),
            Flow::Shooting { .. } => None,
        }
    }

    pub fn sample(&self, grid: &[f64]) -> Result<Trajectory> {
        let mut y = Vec::with_capacity(grid.len());
        let mut u = Vec::with_capacity(grid.len());
        let mut lambda = Vec::with_capacity(grid.len());
        for &t in grid {
            let (yt, lt) = self.state_costate(t)?;
            u.push(self.control(&lt));
            y.push(yt);
            lambda.push(lt);
        }
        Ok(Trajectory {
            grid: grid.to_vec(),
            y,
            u,
            lambda,
            v_t: self.cost,
            horizon: self.horizon,
            boundary_weight: match self.regime {
                Regime::FreeFinalState => Some(self.boundary_weight()?),
                Regime::FixedEndpoints => None,
            },
        })
    }
}

struct Common {
    y_bar: Vector,
    lambda_bar: Vector,
    gain: Matrix,
    s: Matrix,
}

fn common(problem: &LqProblem, static_solution: &StaticSolution) -> Result<Common> {
    Ok(Common {
        y_bar: static_solution.y(),
        lambda_bar: static_solution.lambda(),
        gain: problem.r_inv()? * problem.b.transpose(),
        s: problem.s()?,
    })
}

fn check_horizon(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn solve_checked(m: &Matrix, rhs: &Vector, max_condition: f64) -> Result<(Vector, f64)> {
    let lu = Lu::new(m)?;
    let condition = lu.condition();
    if !(condition <= max_condition) {
        return Err(Error::SingularBoundarySystem { condition });
    }
    Ok((lu.solve(rhs)?, condition))
}

/// Quadratic part of the cost along an extremal deviation, from
/// `d/dt⟨δλ, δy⟩ = ‖δy‖²_Q + ‖δλ‖²_S`: `½[⟨δλ, δy⟩]₀^T`.
fn boundary_quadratic(dy0: &Vector, dl0: &Vector, dy_t: &Vector, dl_t: &Vector) -> f64 {
    0.5 * (dl_t.dot(dy_t) - dl0.dot(dy0))
}

/// Fixed-endpoint problem from `y0` to `y1` over `[0, T]`.
#[allow(clippy::too_many_arguments)]
pub fn solve_fixed(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y0: &Vector,
    y1: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    check_horizon(horizon)?;
    if riccati.n.is_none() {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    }
    let y_bar = static_solution.y();
    let dy0 = y0 - &y_bar;
    let dy1 = y1 - &y_bar;
    let nu_t = riccati.nu * horizon;

    if nu_t < SHOOTING_BELOW {
        return shoot_fixed(problem, static_solution, riccati, &dy0, &dy1, horizon, tol);
    }
    decoupled_fixed(problem, static_solution, riccati, &dy0, &dy1, horizon, tol)
}

/// Fixed regime through `e^{TM}`.
fn shoot_fixed(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    dy0: &Vector,
    dy1: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    let c = common(problem, static_solution)?;
    let n = problem.n();
    let base = horizon * static_solution.v_bar + c.lambda_bar.dot(&(dy1 - dy0));
    let m = kkt_matrix(problem)?;
    let phi = matrix_exp(&(&m * horizon))?;
    let phi11 = block(&phi, 0, 0, n, n);
    let phi12 = block(&phi, 0, n, n, n);
    let phi21 = block(&phi, n, 0, n, n);
    let phi22 = block(&phi, n, n, n, n);
    let (dl0, condition) = solve_checked(&phi12, &(dy1 - phi11 * dy0), tol.boundary_condition)?;
    let dl_t = phi21 * dy0 + phi22 * &dl0;
    let cost = base + boundary_quadratic(dy0, &dl0, dy1, &dl_t);
    let z0 = stack(dy0, &dl0);
    Ok(ExactSolution {
        regime: Regime::FixedEndpoints,
        horizon,
        cost,
        method: SolveMethod::Shooting,
        condition,
        y_bar: c.y_bar,
        lambda_bar: c.lambda_bar,
        u_d: problem.u_d.clone(),
        gain: c.gain,
        p: riccati.p.clone(),
        flow: Flow::Shooting { m, z0 },
    })
}

/// Fixed regime in decoupled coordinates.
fn decoupled_fixed(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    dy0: &Vector,
    dy1: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    let (Some(n_mat), Some(a_plus)) = (&riccati.n, &riccati.a_plus) else {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    };
    let c = common(problem, static_solution)?;
    let n = problem.n();
    let nu_t = riccati.nu * horizon;
    let base = horizon * static_solution.v_bar + c.lambda_bar.dot(&(dy1 - dy0));
    let (e_minus, e_plus, method) = if nu_t > TRUNCATE_ABOVE {
        (
            Matrix::zeros(n, n),
            Matrix::zeros(n, n),
            SolveMethod::Truncated,
        )
    } else {
        (
            matrix_exp(&(&riccati.a_minus * horizon))?,
            matrix_exp(&(a_plus * (-horizon)))?,
            SolveMethod::Decoupled,
        )
    };
    let ident = Matrix::identity(n, n);
    let j_t = block2x2(&ident, &e_plus, &e_minus, &ident);
    let (x, condition) = solve_checked(&j_t, &stack(dy0, dy1), tol.boundary_condition)?;
    let w0 = x.rows(0, n).into_owned();
    let v_t = x.rows(n, n).into_owned();

    let p = &riccati.p;
    let s = &c.s;
    let k_vv = &problem.q + n_mat * s * n_mat;
    let k_ww = &problem.q + p * s * p;
    let k_vw = &problem.q + n_mat * s * p;
    let i_vv = v_t.dot(&(van_loan_integral(&(-a_plus), &k_vv, horizon)? * &v_t));
    let i_ww = w0.dot(&(van_loan_integral(&riccati.a_minus, &k_ww, horizon)? * &w0));
    let i_vw = v_t
        .dot(&(coupled_integral(&(-a_plus.transpose()), &k_vw, &riccati.a_minus, horizon)? * &w0));
    let cost = base + 0.5 * (i_vv + i_ww + 2.0 * i_vw);

    Ok(ExactSolution {
        regime: Regime::FixedEndpoints,
        horizon,
        cost,
        method,
        condition,
        y_bar: c.y_bar,
        lambda_bar: c.lambda_bar,
        u_d: problem.u_d.clone(),
        gain: c.gain,
        p: p.clone(),
        flow: Flow::Fixed {
            a_minus: riccati.a_minus.clone(),
            a_plus: a_plus.clone(),
            p: p.clone(),
            n: n_mat.clone(),
            w0,
            v_t,
        },
    })
}

/// Free-final-state problem from `y0` over `[0, T]`, given `E` and `I + PE`.
#[allow(clippy::too_many_arguments)]
pub fn solve_free(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    e: &Matrix,
    ipe: &Matrix,
    y0: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    check_horizon(horizon)?;
    let dy0 = y0 - static_solution.y();
    let nu_t = riccati.nu * horizon;

    if nu_t < SHOOTING_BELOW {
        return shoot_free(problem, static_solution, riccati, &dy0, horizon, tol);
    }
    decoupled_free(
        problem,
        static_solution,
        riccati,
        e,
        ipe,
        &dy0,
        horizon,
        tol,
    )
}

/// Free regime through `e^{TM}`.
fn shoot_free(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    dy0: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    let c = common(problem, static_solution)?;
    let n = problem.n();
    let m = kkt_matrix(problem)?;
    let phi = matrix_exp(&(&m * horizon))?;
    let phi11 = block(&phi, 0, 0, n, n);
    let phi12 = block(&phi, 0, n, n, n);
    let phi21 = block(&phi, n, 0, n, n);
    let phi22 = block(&phi, n, n, n, n);
    let (dl0, condition) = solve_checked(
        &phi22,
        &(-&c.lambda_bar - phi21 * dy0),
        tol.boundary_condition,
    )?;
    let dy_t = phi11 * dy0 + phi12 * &dl0;
    // λ(T) = 0, so δλ(T) = −λ̄
    let quadratic = boundary_quadratic(dy0, &dl0, &dy_t, &(-&c.lambda_bar));
    let cost = horizon * static_solution.v_bar + c.lambda_bar.dot(&(&dy_t - dy0)) + quadratic;
    let z0 = stack(dy0, &dl0);
    Ok(ExactSolution {
        regime: Regime::FreeFinalState,
        horizon,
        cost,
        method: SolveMethod::Shooting,
        condition,
        y_bar: c.y_bar,
        lambda_bar: c.lambda_bar,
        u_d: problem.u_d.clone(),
        gain: c.gain,
        p: riccati.p.clone(),
        flow: Flow::Shooting { m, z0 },
    })
}

/// Free regime in decoupled coordinates.
#[allow(clippy::too_many_arguments)]
fn decoupled_free(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    e: &Matrix,
    ipe: &Matrix,
    dy0: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    let c = common(problem, static_solution)?;
    let n = problem.n();
    let nu_t = riccati.nu * horizon;
    let p = &riccati.p;
    let (e_minus, method) = if nu_t > TRUNCATE_ABOVE {
        (Matrix::zeros(n, n), SolveMethod::Truncated)
    } else {
        (
            matrix_exp(&(&riccati.a_minus * horizon))?,
            SolveMethod::Decoupled,
        )
    };
    let ident = Matrix::identity(n, n);
    let system = block2x2(
        &ident,
        &(-(e * e_minus.transpose())),
        &(-(p * &e_minus)),
        ipe,
    );
    let (x, condition) = solve_checked(
        &system,
        &stack(dy0, &(-&c.lambda_bar)),
        tol.boundary_condition,
    )?;
    let v0 = x.rows(0, n).into_owned();
    let w_t = x.rows(n, n).into_owned();

    let s = &c.s;
    let q = &problem.q;
    let k_vv = q + p * s * p;
    let k_ww = e * q * e + ipe.transpose() * s * ipe;
    let k_vw = -(q * e) - p * s * ipe;
    let a_mt = riccati.a_minus.transpose();
    let i_vv = v0.dot(&(van_loan_integral(&riccati.a_minus, &k_vv, horizon)? * &v0));
    let i_ww = w_t.dot(&(van_loan_integral(&a_mt, &k_ww, horizon)? * &w_t));
    let i_vw = v0.dot(&(coupled_integral(&a_mt, &k_vw, &a_mt, horizon)? * &w_t));
    let dy_t = &e_minus * &v0 - e * &w_t;
    let cost = horizon * static_solution.v_bar
        + c.lambda_bar.dot(&(dy_t - dy0))
        + 0.5 * (i_vv + i_ww + 2.0 * i_vw);

    Ok(ExactSolution {
        regime: Regime::FreeFinalState,
        horizon,
        cost,
        method,
        condition,
        y_bar: c.y_bar,
        lambda_bar: c.lambda_bar,
        u_d: problem.u_d.clone(),
        gain: c.gain,
        p: p.clone(),
        flow: Flow::Free {
            a_minus: riccati.a_minus.clone(),
            p: p.clone(),
            e: e.clone(),
            ipe: ipe.clone(),
            v0,
            w_t,
        },
    })
}

/// Dispatches on the regime of `problem`.
#[allow(clippy::too_many_arguments)]
pub fn solve_problem(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    aux: Option<&FreeEndpointAux>,
    y0: &Vector,
    y1: Option<&Vector>,
    horizon: f64,
    tol: &Tolerances,
) -> Result<ExactSolution> {
    match problem.regime {
        Regime::FixedEndpoints => {
            let y1 = y1.ok_or_else(|| {
                Error::InvalidArgument("the fixed regime needs a final state y1".into())
            })?;
            solve_fixed(problem, static_solution, riccati, y0, y1, horizon, tol)
        }
        Regime::FreeFinalState => {
            let aux = aux.ok_or(Error::RegimeMismatch { expected: "free" })?;
            solve_free(
                problem,
                static_solution,
                riccati,
                &aux.e,
                &aux.i_plus_pe,
                y0,
                horizon,
                tol,
            )
        }
    }
}

/// `w_T(T)` of the free problem from `y0` over `[0, T]`.
#[allow(clippy::too_many_arguments)]
pub fn free_boundary_weight(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    e: &Matrix,
    ipe: &Matrix,
    y0: &Vector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<Vector> {
    solve_free(problem, static_solution, riccati, e, ipe, y0, horizon, tol)?.boundary_weight()
}

/// Sampled exact solution of the fixed-endpoint problem.
#[allow(clippy::too_many_arguments)]
pub fn solve_bvp_fixed(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y0: &Vector,
    y1: &Vector,
    horizon: f64,
    grid: &GridSpec,
) -> Result<Trajectory> {
    let sol = solve_fixed(
        problem,
        static_solution,
        riccati,
        y0,
        y1,
        horizon,
        &Tolerances::default(),
    )?;
    sol.sample(&grid.build(horizon)?)
}

/// Sampled exact solution of the free-final-state problem; the trajectory
/// carries `w_T(T)`.
pub fn solve_bvp_free(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    aux: &FreeEndpointAux,
    y0: &Vector,
    horizon: f64,
    grid: &GridSpec,
) -> Result<Trajectory> {
    let sol = solve_free(
        problem,
        static_solution,
        riccati,
        &aux.e,
        &aux.i_plus_pe,
        y0,
        horizon,
        &Tolerances::default(),
    )?;
    sol.sample(&grid.build(horizon)?)
}
