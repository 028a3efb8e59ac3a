//! The full chain static problem → Riccati pair → stabilization values →
//! predictor for one problem instance.

use crate::error::{Error, Result};
use crate::expansion::{
    coupling_norms, ergodic_constant, expansion_fixed, expansion_free, predicted_trajectory_fixed,
    predicted_trajectory_free, sweep_t_grid, CostateAsymptotics, ErgodicCheck, GradientCheck,
    PredictedState, Predictor,
};
use crate::finite_horizon::{solve_fixed, solve_free, ExactSolution};
use crate::linalg::{norm2, Vector};
use crate::model::{BoundaryData, LqProblem, Regime};
use crate::riccati::{free_endpoint_aux_with, solve_riccati, FreeEndpointAux, RiccatiPair};
use crate::stabilization::{stabilization_values, StabilizationValues};
use crate::static_turnpike::{solve_static_with, StaticSolution};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub problem: LqProblem,
    pub boundary: BoundaryData,
    pub tol: Tolerances,
    pub static_solution: StaticSolution,
    pub riccati: RiccatiPair,
    /// Free regime only.
    pub aux: Option<FreeEndpointAux>,
    pub stabilization: StabilizationValues,
    /// Free regime only.
    pub mu: Option<f64>,
    pub predictor: Predictor,
}

impl Analysis {
    pub fn new(problem: LqProblem, boundary: BoundaryData) -> Result<Self> {
        Self::with_tolerances(problem, boundary, Tolerances::default())
    }

    /// Runs every stage that does not depend on the horizon. Validation is
    /// not run here.
    pub fn with_tolerances(
        problem: LqProblem,
        boundary: BoundaryData,
        tol: Tolerances,
    ) -> Result<Self> {
        problem.check_boundary(&boundary)?;
        let static_solution = solve_static_with(&problem, &tol)?;
        let riccati = solve_riccati(&problem)?;
        let stabilization = stabilization_values(
            &static_solution,
            &riccati,
            &boundary.y0,
            boundary.y1.as_ref(),
        );
        let (aux, mu, predictor) = match problem.regime {
            Regime::FixedEndpoints => (
                None,
                None,
                expansion_fixed(&static_solution, &stabilization)?,
            ),
            Regime::FreeFinalState => {
                let aux = free_endpoint_aux_with(&problem, &riccati, &static_solution, &tol)?;
                let mu = ergodic_constant(&problem, &static_solution, &riccati, &aux)?;
                let predictor = expansion_free(&static_solution, &stabilization, mu);
                (Some(aux), Some(mu), predictor)
            }
        };
        Ok(Self {
            problem,
            boundary,
            tol,
            static_solution,
            riccati,
            aux,
            stabilization,
            mu,
            predictor,
        })
    }

    pub fn nu(&self) -> f64 {
        self.riccati.nu
    }

    /// Exact solve with the instance's own boundary data.
    pub fn solve(&self, horizon: f64) -> Result<ExactSolution> {
        self.solve_from(&self.boundary.y0, self.boundary.y1.as_ref(), horizon)
    }

    pub fn solve_from(
        &self,
        y0: &Vector,
        y1: Option<&Vector>,
        horizon: f64,
    ) -> Result<ExactSolution> {
        match (&self.aux, y1) {
            (None, Some(y1)) => solve_fixed(
                &self.problem,
                &self.static_solution,
                &self.riccati,
                y0,
                y1,
                horizon,
                &self.tol,
            ),
            (None, None) => Err(Error::InvalidArgument(
                "the fixed regime needs a final state y1".into(),
            )),
            (Some(aux), _) => solve_free(
                &self.problem,
                &self.static_solution,
                &self.riccati,
                &aux.e,
                &aux.i_plus_pe,
                y0,
                horizon,
                &self.tol,
            ),
        }
    }

    /// `floor_factor · ε · (|T·V̄| + |constant| + 1)`
    pub fn r_floor(&self, horizon: f64) -> f64 {
        self.tol.floor_factor
            * f64::EPSILON
            * ((horizon * self.static_solution.v_bar).abs() + self.predictor.constant.abs() + 1.0)
    }

    /// Sweep horizons: the default grid, phase-locked when the slowest
    /// closed-loop mode oscillates.
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        sweep_t_grid(self.problem.regime, &self.riccati)
    }

    /// Leading-order prediction at time `t`. In the free regime `w_tt`
    /// defaults to `w_∞`.
    pub fn predicted(&self, horizon: f64, t: f64, w_tt: Option<&Vector>) -> Result<PredictedState> {
        match (&self.aux, &self.boundary.y1) {
            (None, Some(y1)) => predicted_trajectory_fixed(
                &self.problem,
                &self.static_solution,
                &self.riccati,
                &self.boundary.y0,
                y1,
                horizon,
                t,
            ),
            (None, None) => Err(Error::InvalidArgument(
                "the fixed regime needs a final state y1".into(),
            )),
            (Some(aux), _) => predicted_trajectory_free(
                &self.problem,
                &self.static_solution,
                &self.riccati,
                aux,
                &self.boundary.y0,
                horizon,
                t,
                w_tt.unwrap_or(&aux.w_inf),
            ),
        }
    }

    /// Central differences of `V_T` in each boundary coordinate against
    /// `−λ_T(0)` and `λ_T(T)`. The default step is `1e-5·(1 + ‖y0‖)`.
    pub fn gradient_check(&self, horizon: f64, h: Option<f64>) -> Result<GradientCheck> {
        let y0 = &self.boundary.y0;
        let y1 = self.boundary.y1.as_ref();
        let h = h.unwrap_or(1e-5 * (1.0 + y0.norm()));
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {h}"
            )));
        }
        let sol = self.solve(horizon)?;
        let (_, lambda0) = sol.state_costate(0.0)?;
        let (_, lambda_t) = sol.state_costate(horizon)?;
        let n = y0.len();

        let mut fd = Vector::zeros(n);
        for i in 0..n {
            let mut plus = y0.clone();
            let mut minus = y0.clone();
            plus[i] += h;
            minus[i] -= h;
            fd[i] = (self.solve_from(&plus, y1, horizon)?.cost()
                - self.solve_from(&minus, y1, horizon)?.cost())
                / (2.0 * h);
        }
        let initial = (&fd + &lambda0).amax() / lambda0.amax().max(1.0);

        let terminal = match y1 {
            Some(y1) => {
                for i in 0..n {
                    let mut plus = y1.clone();
                    let mut minus = y1.clone();
                    plus[i] += h;
                    minus[i] -= h;
                    fd[i] = (self.solve_from(y0, Some(&plus), horizon)?.cost()
                        - self.solve_from(y0, Some(&minus), horizon)?.cost())
                        / (2.0 * h);
                }
                Some((&fd - &lambda_t).amax() / lambda_t.amax().max(1.0))
            }
            None => None,
        };
        Ok(GradientCheck {
            h,
            initial,
            terminal,
        })
    }

    /// Walks `T = 8, 16, 24, 32, 40` (in units of `1/ν`) from `y0 = ȳ` and
    /// compares `V_T(ȳ) − T·V̄` with `μ` at the largest horizon.
    pub fn ergodic_check(&self) -> Result<Option<ErgodicCheck>> {
        let (Some(aux), Some(mu)) = (&self.aux, self.mu) else {
            return Ok(None);
        };
        let y_bar = self.static_solution.y();
        let mut last = None;
        for units in [8.0, 16.0, 24.0, 32.0, 40.0] {
            let horizon = units / self.nu();
            let cost = solve_free(
                &self.problem,
                &self.static_solution,
                &self.riccati,
                &aux.e,
                &aux.i_plus_pe,
                &y_bar,
                horizon,
                &self.tol,
            )?
            .cost();
            last = Some((horizon, cost - horizon * self.static_solution.v_bar));
        }
        let (t, limit) = last.unwrap();
        let r_floor = self.tol.floor_factor
            * f64::EPSILON
            * ((t * self.static_solution.v_bar).abs() + mu.abs() + 1.0);
        Ok(Some(ErgodicCheck {
            mu,
            limit,
            t,
            r_floor,
            agrees: (mu - limit).abs() <= self.tol.mu_floor_multiple * r_floor,
        }))
    }

    /// Costate limits at both ends for the fixed regime.
    pub fn costate_asymptotics(&self, horizon: f64) -> Result<CostateAsymptotics> {
        let (Some(n), Some(a_plus), Some(delta), Some(y1)) = (
            &self.riccati.n,
            &self.riccati.a_plus,
            &self.riccati.delta,
            &self.boundary.y1,
        ) else {
            return Err(Error::RegimeMismatch { expected: "fixed" });
        };
        let sol = self.solve(horizon)?;
        let (_, lambda0) = sol.state_costate(0.0)?;
        let (_, lambda_t) = sol.state_costate(horizon)?;
        let y_bar = self.static_solution.y();
        let lambda_bar = self.static_solution.lambda();
        let dy0 = &self.boundary.y0 - &y_bar;
        let dy1 = y1 - &y_bar;
        let initial_gap = (-lambda0 - (-&lambda_bar + &self.riccati.p * &dy0)).norm();
        let final_gap = (lambda_t - (&lambda_bar - n * &dy1)).norm();
        let (e_minus, e_plus) = coupling_norms(&self.riccati.a_minus, a_plus, horizon)?;
        let d = norm2(delta);
        Ok(CostateAsymptotics {
            t: horizon,
            initial_gap,
            initial_envelope: 2.0 * d * e_plus * (dy1.norm() + e_minus * dy0.norm()),
            final_gap,
            final_envelope: 2.0 * d * e_minus * (dy0.norm() + e_plus * dy1.norm()),
        })
    }
}
