//! Numerical verification of one problem instance: hypotheses, algebraic
//! identities, expansion remainders, sensitivities and solver agreement.

use serde::Serialize;

use crate::error::Result;
use crate::expansion::{ExpansionReport, FitStatus, SweepOptions};
use crate::finite_horizon::direct_transcription;
use crate::linalg::max_abs;
use crate::model::{validate_with, Check, Regime, ValidationReport};
use crate::pipeline::Analysis;
use crate::riccati::{are_residual, spectral_mirror_gap};
use crate::static_turnpike::kkt_residuals;

/// Transcription steps of the solver cross-check.
pub const TRANSCRIPTION_STEPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub validation: ValidationReport,
    pub checks: Vec<Check>,
    pub expansion: ExpansionReport,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.validation.passed() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.validation
            .failures()
            .into_iter()
            .chain(self.checks.iter().filter(|c| !c.passed))
            .collect()
    }
}

/// `value ≤ limit`
fn at_most(name: &str, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= limit,
        margin: limit - value,
        detail: format!("{value:e} (limit {limit:e})"),
    }
}

/// `value ≥ limit`
fn at_least(name: &str, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        passed: value >= limit,
        margin: value - limit,
        detail: format!("{value:e} (limit {limit:e})"),
    }
}

fn skipped(name: &str, why: &str) -> Check {
    Check {
        name: name.into(),
        passed: true,
        margin: 0.0,
        detail: why.into(),
    }
}

/// `V_T(y0, y1) = V_s(y0, y_T(s)) + V_{T−s}(y_T(s), y1)`, relative error.
pub fn splice_error(analysis: &Analysis, horizon: f64, s: f64) -> Result<f64> {
    let y1 = analysis.boundary.y1.as_ref();
    let whole = analysis.solve(horizon)?;
    let (ys, _) = whole.state_costate(s)?;
    let first = analysis
        .solve_from(&analysis.boundary.y0, Some(&ys), s)?
        .cost();
    let second = analysis.solve_from(&ys, y1, horizon - s)?.cost();
    Ok((whole.cost() - first - second).abs() / whole.cost().abs().max(1.0))
}

/// Runs the sweep over `analysis.t_grid()` and every applicable check.
pub fn run_verification(analysis: &Analysis, options: &SweepOptions) -> Result<VerificationReport> {
    let tol = &analysis.tol;
    let problem = &analysis.problem;
    let nu = analysis.nu();
    let validation = validate_with(problem, tol)?;
    let mut checks = Vec::new();

    let kkt = kkt_residuals(problem, &analysis.static_solution);
    let y = analysis.static_solution.y();
    let u = analysis.static_solution.u();
    let kkt_scale = 1e-10
        * (max_abs(&problem.a) * y.norm()
            + max_abs(&problem.b) * u.norm()
            + problem.q.norm()
            + 1.0);
    checks.push(at_most(
        "static KKT residual",
        kkt.feasibility.max(kkt.adjoint).max(kkt.control),
        kkt_scale,
    ));

    let are_limit = 1e-9 * max_abs(&problem.q);
    checks.push(at_most(
        "ARE residual P",
        max_abs(&are_residual(problem, &analysis.riccati.p)?),
        are_limit,
    ));
    if let Some(n) = &analysis.riccati.n {
        checks.push(at_most(
            "ARE residual N",
            max_abs(&are_residual(problem, n)?),
            are_limit,
        ));
    }
    if let Some(gap) = spectral_mirror_gap(&analysis.riccati)? {
        checks.push(at_most("spectrum of A- mirrors A+", gap, 1e-7));
    }

    let grid = analysis.t_grid()?;
    let expansion = analysis.sweep(&grid, options)?;
    let rate_limit = tol.rate_fraction * nu;
    match (
        expansion.fit_status,
        expansion.nu_fit,
        expansion.fit_quality,
    ) {
        (FitStatus::Fitted, Some(rate), Some(r2)) => {
            checks.push(at_least("residual decay rate", rate, rate_limit));
            checks.push(at_least("residual fit R^2", r2, tol.fit_r2));
        }
        (_, _, _) => checks.push(skipped(
            "residual decay rate",
            "residuals at the rounding floor",
        )),
    }
    match (problem.regime, expansion.prediction_rate) {
        (Regime::FixedEndpoints, Some(rate)) => checks.push(at_least(
            "trajectory prediction rate",
            rate,
            tol.trajectory_rate_fraction * nu,
        )),
        (Regime::FreeFinalState, Some(rate)) => {
            checks.push(at_least("trajectory prediction rate", rate, rate_limit))
        }
        (_, None) => checks.push(skipped(
            "trajectory prediction rate",
            "prediction errors at the rounding floor",
        )),
    }
    checks.push(at_most(
        "turnpike constant spread",
        expansion.turnpike_constant_spread,
        tol.turnpike_ratio,
    ));

    let mid = 12.0 / nu;
    let grad = analysis.gradient_check(mid, None)?;
    checks.push(at_most(
        "gradient of V_T in y0",
        grad.initial,
        tol.gradient_tol,
    ));
    if let Some(terminal) = grad.terminal {
        checks.push(at_most("gradient of V_T in y1", terminal, tol.gradient_tol));
    }

    let scale = analysis.solution_scale();
    let mut expansion = expansion;
    match problem.regime {
        Regime::FixedEndpoints => {
            let c = analysis.costate_asymptotics(mid)?;
            checks.push(at_most(
                "initial costate limit",
                c.initial_gap,
                c.initial_envelope,
            ));
            checks.push(at_most(
                "final costate limit",
                c.final_gap,
                c.final_envelope,
            ));
            let horizon = 10.0 / nu;
            checks.push(at_most(
                "dynamic programming splice",
                splice_error(analysis, horizon, horizon / 3.0)?,
                tol.splice_tol,
            ));
        }
        Regime::FreeFinalState => {
            let worst = expansion
                .sweep
                .iter()
                .filter_map(|p| p.final_costate)
                .fold(0.0, f64::max);
            checks.push(at_most(
                "transversality",
                worst,
                tol.transversality_tol * scale,
            ));
            let ergodic = analysis.ergodic_check()?;
            if let Some(e) = ergodic {
                checks.push(at_most(
                    "ergodic constant",
                    (e.mu - e.limit).abs(),
                    tol.mu_floor_multiple * e.r_floor,
                ));
            }
            expansion.ergodic_check = ergodic;
        }
    }

    let horizon = 10.0 / nu;
    let exact = analysis.solve(horizon)?.cost();
    let qp = direct_transcription(
        problem,
        &analysis.boundary.y0,
        analysis.boundary.y1.as_ref(),
        horizon,
        TRANSCRIPTION_STEPS,
    )?;
    checks.push(at_most(
        "transcription agreement",
        (exact - qp.cost).abs() / (1.0 + exact.abs()),
        tol.transcription_tol,
    ));

    Ok(VerificationReport {
        validation,
        checks,
        expansion,
    })
}
