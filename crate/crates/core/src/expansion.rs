//! Two-term expansions of the value function, predicted trajectories, the
//! ergodic constant and the T-sweep machinery that measures the remainders.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_horizon::{GridSpec, SolveMethod};
use crate::linalg::{eigenvalues, matrix_exp, norm2, solve_lyapunov, Lu, Matrix, Vector};
use crate::model::{BoundaryData, LqProblem, Regime};
use crate::pipeline::Analysis;
use crate::riccati::{FreeEndpointAux, RiccatiPair};
use crate::stabilization::StabilizationValues;
use crate::static_turnpike::StaticSolution;

/// `T ↦ slope·T + constant`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Predictor {
    pub slope: f64,
    pub constant: f64,
}

impl Predictor {
    pub fn eval(&self, t: f64) -> f64 {
        self.slope * t + self.constant
    }
}

/// `T·V̄ + S_f − ⟨λ̄, y0 − ȳ⟩ + S_b + ⟨λ̄, y1 − ȳ⟩`, checked against the
/// equivalent form `T·V̄ + V_f + V_b`.
pub fn expansion_fixed(
    static_solution: &StaticSolution,
    stab: &StabilizationValues,
) -> Result<Predictor> {
    let (Some(s_b), Some(lambda_y1), Some(v_b)) = (stab.s_b, stab.lambda_y1, stab.v_b) else {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    };
    let constant = stab.s_f - stab.lambda_y0 + s_b + lambda_y1;
    let dissipative = stab.v_f + v_b;
    let gap = (constant - dissipative).abs();
    if gap > 1e-12 * constant.abs().max(dissipative.abs()).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "expansion constants disagree: {constant:e} vs {dissipative:e}"
        )));
    }
    Ok(Predictor {
        slope: static_solution.v_bar,
        constant,
    })
}

/// `T·V̄ + V_f + μ`
pub fn expansion_free(
    static_solution: &StaticSolution,
    stab: &StabilizationValues,
    mu: f64,
) -> Predictor {
    Predictor {
        slope: static_solution.v_bar,
        constant: stab.v_f + mu,
    }
}

/// `μ = ½⟨Z w_∞, w_∞⟩ + ⟨λ̄, (−AE + BR⁻¹Bᵀ(I + PE))(−A₋ᵀ)⁻¹ w_∞⟩` with
/// `A₋Z + ZA₋ᵀ + EQE + (I + PE)ᵀBR⁻¹Bᵀ(I + PE) = 0`.
pub fn ergodic_constant(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    aux: &FreeEndpointAux,
) -> Result<f64> {
    let s = problem.s()?;
    let e = &aux.e;
    let ipe = &aux.i_plus_pe;
    let weight = e * &problem.q * e + ipe.transpose() * &s * ipe;
    let z = solve_lyapunov(&riccati.a_minus, &weight)?;
    let quadratic = 0.5 * aux.w_inf.dot(&(z * &aux.w_inf));
    let flow = Lu::new(&(-riccati.a_minus.transpose()))?.solve(&aux.w_inf)?;
    let factor = -(&problem.a * e) + &s * ipe;
    Ok(quadratic + static_solution.lambda().dot(&(factor * flow)))
}

/// Comparison of `μ` against `V_T(ȳ) − T·V̄` at growing horizons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErgodicCheck {
    pub mu: f64,
    /// `V_T(ȳ) − T·V̄` at the largest horizon.
    pub limit: f64,
    pub t: f64,
    pub r_floor: f64,
    pub agrees: bool,
}

/// Predicted `(y, λ, u)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedState {
    pub y: Vector,
    pub lambda: Vector,
    pub u: Vector,
}

fn predicted_from(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    dy: Vector,
    dl: Vector,
) -> Result<PredictedState> {
    let lambda = dl + static_solution.lambda();
    let u = &problem.u_d + problem.r_inv()? * problem.b.transpose() * &lambda;
    Ok(PredictedState {
        y: dy + static_solution.y(),
        lambda,
        u,
    })
}

/// Leading-order optimal triple of the fixed-endpoint problem:
/// `y = ȳ + e^{tA₋}(y0 − ȳ − e^{−TA₊}(y1 − ȳ)) + e^{−(T−t)A₊}(y1 − ȳ − e^{TA₋}(y0 − ȳ))`,
/// `λ = λ̄ − P e^{tA₋}(…) − N e^{−(T−t)A₊}(…)`.
#[allow(clippy::too_many_arguments)]
pub fn predicted_trajectory_fixed(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    y0: &Vector,
    y1: &Vector,
    horizon: f64,
    t: f64,
) -> Result<PredictedState> {
    let (Some(n), Some(a_plus)) = (&riccati.n, &riccati.a_plus) else {
        return Err(Error::RegimeMismatch { expected: "fixed" });
    };
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [0, {horizon}]"
        )));
    }
    let y_bar = static_solution.y();
    let dy0 = y0 - &y_bar;
    let dy1 = y1 - &y_bar;
    let forward =
        matrix_exp(&(&riccati.a_minus * t))? * (&dy0 - matrix_exp(&(a_plus * (-horizon)))? * &dy1);
    let backward = matrix_exp(&(a_plus * (t - horizon)))?
        * (&dy1 - matrix_exp(&(&riccati.a_minus * horizon))? * &dy0);
    let dl = -(&riccati.p * &forward) - n * &backward;
    predicted_from(problem, static_solution, forward + backward, dl)
}

/// Leading-order optimal triple of the free-endpoint problem:
/// `y = ȳ + e^{tA₋}(y0 − ȳ) − E e^{(T−t)A₋ᵀ} w`,
/// `λ = λ̄ − P e^{tA₋}(y0 − ȳ) + (I + PE) e^{(T−t)A₋ᵀ} w`, with `w = w_T(T)`.
#[allow(clippy::too_many_arguments)]
pub fn predicted_trajectory_free(
    problem: &LqProblem,
    static_solution: &StaticSolution,
    riccati: &RiccatiPair,
    aux: &FreeEndpointAux,
    y0: &Vector,
    horizon: f64,
    t: f64,
    w_tt: &Vector,
) -> Result<PredictedState> {
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "time {t} outside [0, {horizon}]"
        )));
    }
    let z = matrix_exp(&(&riccati.a_minus * t))? * (y0 - static_solution.y());
    let w = matrix_exp(&(riccati.a_minus.transpose() * (horizon - t)))? * w_tt;
    let dy = &z - &aux.e * &w;
    let dl = -(&riccati.p * &z) + &aux.i_plus_pe * &w;
    predicted_from(problem, static_solution, dy, dl)
}

/// Ordinary least squares of `log|r|` against `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    /// `−slope`
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `log y = intercept − rate·x`; `None` with fewer than 2 points.
pub fn log_linear_fit(x: &[f64], y: &[f64]) -> Option<LogFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(a, v)| (*a, v.ln()))
        .collect();
    let k = pts.len();
    if k < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogFit {
        rate: -slope,
        intercept: my - slope * mx,
        r_squared,
        points: k,
    })
}

/// Default horizons in units of `1/ν`.
pub fn default_t_grid(regime: Regime, nu: f64) -> Vec<f64> {
    let units: &[f64] = match regime {
        Regime::FixedEndpoints => &[6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
        Regime::FreeFinalState => &[8.0, 12.0, 16.0, 20.0, 24.0],
    };
    units.iter().map(|u| u / nu).collect()
}

/// Horizons spaced by a multiple of the half period `π/ω` of the slowest
/// closed-loop mode, so that oscillating residuals are sampled in phase.
/// Falls back to [`default_t_grid`] when that mode is real or the spacing
/// would push `νT` beyond 24.
pub fn sweep_t_grid(regime: Regime, riccati: &RiccatiPair) -> Result<Vec<f64>> {
    let nu = riccati.nu;
    let base = match regime {
        Regime::FixedEndpoints => 6.0,
        Regime::FreeFinalState => 8.0,
    };
    let eig = eigenvalues(&riccati.a_minus)?;
    let slowest = eig.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max);
    let omega = eig
        .iter()
        .filter(|e| (e.re - slowest).abs() <= 1e-8 * slowest.abs().max(1.0))
        .map(|e| e.im.abs())
        .fold(0.0, f64::max);
    if omega <= 1e-8 * slowest.abs().max(1.0) {
        return Ok(default_t_grid(regime, nu));
    }
    let half = std::f64::consts::PI / omega;
    let spacing = half * ((2.0 / nu) / half).ceil().max(1.0);
    if base + 3.0 * nu * spacing > 24.0 {
        return Ok(default_t_grid(regime, nu));
    }
    Ok((0..4).map(|k| base / nu + k as f64 * spacing).collect())
}

/// One horizon of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t: f64,
    pub v_t: f64,
    pub predictor: f64,
    /// `V_T − predictor(T)`
    pub residual: f64,
    pub r_floor: f64,
    pub above_floor: bool,
    pub method: SolveMethod,
    pub condition: f64,
    /// `max_t ‖y_T(t) − y_pred(t)‖` over the sample grid.
    pub prediction_error: f64,
    /// `‖y_pred(0) − y0‖`
    pub mismatch_initial: f64,
    /// `‖y_pred(T) − y1‖` (fixed regime).
    pub mismatch_final: Option<f64>,
    /// `max_t ‖y_T(t) − ȳ‖ e^{ν min(t, T−t)}`
    pub turnpike_constant: f64,
    /// `‖y_T(T/2) − ȳ‖`
    pub midpoint_deviation: f64,
    /// `‖λ_T(T)‖` (free regime).
    pub final_costate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Fewer than 3 residuals exceed the rounding floor.
    FloorReached {
        above_floor: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionTerms {
    pub s_f: f64,
    pub s_b: Option<f64>,
    pub lambda_y0: f64,
    pub lambda_y1: Option<f64>,
    pub v_f: f64,
    pub v_b: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub regime: Regime,
    pub v_bar: f64,
    pub terms: ExpansionTerms,
    pub predictor: Predictor,
    pub nu_theory: f64,
    pub nu_fit: Option<f64>,
    /// `R²` of the residual fit.
    pub fit_quality: Option<f64>,
    pub fit_status: FitStatus,
    /// Decay rate of `max_t ‖y_T − y_pred‖` across the sweep.
    pub prediction_rate: Option<f64>,
    /// Decay rate of `‖y_T(T/2) − ȳ‖` against `T/2`.
    pub turnpike_rate: Option<f64>,
    /// Largest over smallest turnpike constant across the sweep.
    pub turnpike_constant_spread: f64,
    pub ergodic_check: Option<ErgodicCheck>,
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub grid: GridSpec,
    /// Worker threads; 1 runs serially.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            jobs: 1,
        }
    }
}

/// Full pipeline on `problem`, then the sweep over `t_grid`.
pub fn sweep_and_fit(
    problem: &LqProblem,
    boundary: &BoundaryData,
    t_grid: &[f64],
    options: &SweepOptions,
) -> Result<ExpansionReport> {
    Analysis::new(problem.clone(), boundary.clone())?.sweep(t_grid, options)
}

impl Analysis {
    fn sweep_point(&self, horizon: f64, grid: &GridSpec) -> Result<SweepPoint> {
        let sol = self.solve(horizon)?;
        let v_t = sol.cost();
        let predictor = self.predictor.eval(horizon);
        let residual = v_t - predictor;
        let r_floor = self.r_floor(horizon);
        let times = grid.build(horizon)?;
        let y_bar = self.static_solution.y();
        let nu = self.riccati.nu;
        let w_tt = match self.problem.regime {
            Regime::FreeFinalState => Some(sol.boundary_weight()?),
            Regime::FixedEndpoints => None,
        };
        let mut prediction_error = 0.0_f64;
        let mut turnpike_constant = 0.0_f64;
        let mut mismatch_initial = 0.0;
        let mut mismatch_final = None;
        for (k, &t) in times.iter().enumerate() {
            let (y, _) = sol.state_costate(t)?;
            let pred = self.predicted(horizon, t, w_tt.as_ref())?;
            prediction_error = prediction_error.max((&y - &pred.y).norm());
            turnpike_constant =
                turnpike_constant.max((&y - &y_bar).norm() * (nu * t.min(horizon - t)).exp());
            if k == 0 {
                mismatch_initial = (&pred.y - &self.boundary.y0).norm();
            }
            if k + 1 == times.len() {
                mismatch_final = self.boundary.y1.as_ref().map(|y1| (&pred.y - y1).norm());
            }
        }
        let (y_mid, _) = sol.state_costate(0.5 * horizon)?;
        let final_costate = match self.problem.regime {
            Regime::FreeFinalState => Some(sol.state_costate(horizon)?.1.norm()),
            Regime::FixedEndpoints => None,
        };
        Ok(SweepPoint {
            t: horizon,
            v_t,
            predictor,
            residual,
            r_floor,
            above_floor: residual.abs() > r_floor,
            method: sol.method(),
            condition: sol.condition(),
            prediction_error,
            mismatch_initial,
            mismatch_final,
            turnpike_constant,
            midpoint_deviation: (y_mid - y_bar).norm(),
            final_costate,
        })
    }

    /// Exact solves over `t_grid`, residuals against the predictor and
    /// decay-rate fits.
    pub fn sweep(&self, t_grid: &[f64], options: &SweepOptions) -> Result<ExpansionReport> {
        if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "sweep horizons must be positive and finite".into(),
            ));
        }
        let mut horizons = t_grid.to_vec();
        horizons.sort_by(|a, b| a.total_cmp(b));
        horizons.dedup();
        let sweep: Vec<SweepPoint> = if options.jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(options.jobs)
                .build()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            pool.install(|| {
                horizons
                    .par_iter()
                    .map(|&t| self.sweep_point(t, &options.grid))
                    .collect::<Result<Vec<_>>>()
            })?
        } else {
            horizons
                .iter()
                .map(|&t| self.sweep_point(t, &options.grid))
                .collect::<Result<Vec<_>>>()?
        };

        let reliable: Vec<&SweepPoint> = sweep.iter().filter(|p| p.above_floor).collect();
        let fit = if reliable.len() >= 3 {
            log_linear_fit(
                &reliable.iter().map(|p| p.t).collect::<Vec<_>>(),
                &reliable
                    .iter()
                    .map(|p| p.residual.abs())
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        let fit_status = if fit.is_some() {
            FitStatus::Fitted
        } else {
            FitStatus::FloorReached {
                above_floor: reliable.len(),
            }
        };
        let scale = self.solution_scale();
        let resolved = |v: f64| v > 1e3 * f64::EPSILON * scale;
        let pred: Vec<&SweepPoint> = sweep
            .iter()
            .filter(|p| resolved(p.prediction_error))
            .collect();
        let prediction_rate = log_linear_fit(
            &pred.iter().map(|p| p.t).collect::<Vec<_>>(),
            &pred.iter().map(|p| p.prediction_error).collect::<Vec<_>>(),
        )
        .map(|f| f.rate);
        let mid: Vec<&SweepPoint> = sweep
            .iter()
            .filter(|p| resolved(p.midpoint_deviation))
            .collect();
        let turnpike_rate = log_linear_fit(
            &mid.iter().map(|p| 0.5 * p.t).collect::<Vec<_>>(),
            &mid.iter().map(|p| p.midpoint_deviation).collect::<Vec<_>>(),
        )
        .map(|f| f.rate);
        let (lo, hi) = sweep
            .iter()
            .map(|p| p.turnpike_constant)
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), c| {
                (lo.min(c), hi.max(c))
            });
        let turnpike_constant_spread = if sweep.is_empty() || hi == 0.0 {
            1.0
        } else {
            hi / lo
        };

        let stab = &self.stabilization;
        Ok(ExpansionReport {
            regime: self.problem.regime,
            v_bar: self.static_solution.v_bar,
            terms: ExpansionTerms {
                s_f: stab.s_f,
                s_b: stab.s_b,
                lambda_y0: stab.lambda_y0,
                lambda_y1: stab.lambda_y1,
                v_f: stab.v_f,
                v_b: stab.v_b,
                mu: self.mu,
            },
            predictor: self.predictor,
            nu_theory: self.riccati.nu,
            nu_fit: fit.map(|f| f.rate),
            fit_quality: fit.map(|f| f.r_squared),
            fit_status,
            prediction_rate,
            turnpike_rate,
            turnpike_constant_spread,
            ergodic_check: None,
            sweep,
        })
    }

    /// `max(‖y0 − ȳ‖, ‖y1 − ȳ‖, ‖ȳ‖, 1)`, the magnitude against which
    /// trajectory errors are resolved.
    pub(crate) fn solution_scale(&self) -> f64 {
        let y_bar = self.static_solution.y();
        let mut scale = y_bar
            .norm()
            .max((&self.boundary.y0 - &y_bar).norm())
            .max(1.0);
        if let Some(y1) = &self.boundary.y1 {
            scale = scale.max((y1 - &y_bar).norm());
        }
        scale
    }
}

/// Relative errors of the costate against central differences of `V_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub h: f64,
    /// `‖D_{y0}V_T + λ_T(0)‖∞ / max(‖λ_T(0)‖∞, 1)`
    pub initial: f64,
    /// `‖D_{y1}V_T − λ_T(T)‖∞ / max(‖λ_T(T)‖∞, 1)`; absent in the free regime.
    pub terminal: Option<f64>,
}

/// `−λ_T(0)` and `λ_T(T)` against their large-`T` limits
/// `−λ̄ + P(y0 − ȳ)` and `λ̄ − N(y1 − ȳ)`, with the envelopes
/// `2‖Δ‖‖e^{−TA₊}‖(‖y1 − ȳ‖ + ‖e^{TA₋}‖‖y0 − ȳ‖)` and
/// `2‖Δ‖‖e^{TA₋}‖(‖y0 − ȳ‖ + ‖e^{−TA₊}‖‖y1 − ȳ‖)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostateAsymptotics {
    pub t: f64,
    pub initial_gap: f64,
    pub initial_envelope: f64,
    pub final_gap: f64,
    pub final_envelope: f64,
}

impl CostateAsymptotics {
    pub fn within_envelope(&self) -> bool {
        self.initial_gap <= self.initial_envelope && self.final_gap <= self.final_envelope
    }
}

/// Envelope factors `(‖e^{TA₋}‖, ‖e^{−TA₊}‖)` in the spectral norm.
pub(crate) fn coupling_norms(
    a_minus: &Matrix,
    a_plus: &Matrix,
    horizon: f64,
) -> Result<(f64, f64)> {
    Ok((
        norm2(&matrix_exp(&(a_minus * horizon))?),
        norm2(&matrix_exp(&(a_plus * (-horizon)))?),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;
    use crate::riccati::{free_endpoint_aux, solve_riccati};
    use crate::stabilization::stabilization_values;
    use crate::static_turnpike::solve_static;

    fn heat_like() -> LqProblem {
        LqProblem::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 2.0),
            Vector::zeros(1),
            Regime::FreeFinalState,
        )
        .unwrap()
    }

    #[test]
    fn scalar_predictor_constant() {
        let (p, b) = builtin_example("scalar", None).unwrap();
        let st = solve_static(&p).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let stab = stabilization_values(&st, &pair, &b.y0, b.y1.as_ref());
        let pred = expansion_fixed(&st, &stab).unwrap();
        assert!((pred.constant - 2.5).abs() < 1e-13);
        assert_eq!(pred.slope, 0.0);
    }

    #[test]
    fn linear_factor_of_mu_is_minus_e_w() {
        let p = heat_like();
        let st = solve_static(&p).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let aux = free_endpoint_aux(&p, &pair, &st).unwrap();
        let s = p.s().unwrap();
        let factor = -(&p.a * &aux.e) + &s * &aux.i_plus_pe;
        let flow = Lu::new(&(-pair.a_minus.transpose()))
            .unwrap()
            .solve(&aux.w_inf)
            .unwrap();
        let lhs = factor * flow;
        let rhs = -(&aux.e * &aux.w_inf);
        assert!((lhs - rhs).amax() < 1e-13);
    }

    #[test]
    fn fit_recovers_exact_rate() {
        let t = [1.0_f64, 2.0, 3.0, 4.0];
        let y: Vec<f64> = t.iter().map(|x| 3.0 * (-0.7 * *x).exp()).collect();
        let f = log_linear_fit(&t, &y).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(log_linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn grids() {
        let (p, _) = builtin_example("scalar", None).unwrap();
        let pair = solve_riccati(&p).unwrap();
        assert_eq!(
            sweep_t_grid(Regime::FixedEndpoints, &pair).unwrap(),
            vec![6.0, 8.0, 10.0, 12.0, 14.0, 16.0]
        );
        let (p, _) = builtin_example("double_integrator", None).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let g = sweep_t_grid(Regime::FixedEndpoints, &pair).unwrap();
        assert_eq!(g.len(), 4);
        // slowest mode (−√3 ± i)/2 has half period 2π
        assert!(((g[1] - g[0]) - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn scalar_predicted_midpoint() {
        let (p, b) = builtin_example("scalar", None).unwrap();
        let st = solve_static(&p).unwrap();
        let pair = solve_riccati(&p).unwrap();
        let y1 = b.y1.unwrap();
        let s = predicted_trajectory_fixed(&p, &st, &pair, &b.y0, &y1, 10.0, 5.0).unwrap();
        let expect = 1.0 + (-5f64).exp() * (1.0 - (-10f64).exp());
        assert!((s.y[0] - expect).abs() < 1e-14);
        let flat = predicted_trajectory_fixed(&p, &st, &pair, &st.y(), &st.y(), 10.0, 3.0).unwrap();
        assert!((flat.y - st.y()).amax() < 1e-15);
        assert!(flat.u.amax() < 1e-15);
    }
}
