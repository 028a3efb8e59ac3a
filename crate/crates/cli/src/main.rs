use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use lq_turnpike::expansion::SweepOptions;
use lq_turnpike::linalg::{max_abs, Matrix};
use lq_turnpike::model::{builtin_example, load_problem_file, problem_to_json, validate_with};
use lq_turnpike::report::{
    to_json_string, write_json, write_summary_json, write_sweep_csv, write_trajectory_csv,
};
use lq_turnpike::riccati::{are_residual, spectral_mirror_gap, stabilizing_solution};
use lq_turnpike::static_turnpike::kkt_residuals;
use lq_turnpike::{
    run_verification, Analysis, BoundaryData, Error, GridSpec, LqProblem, Tolerances,
};

/// `println!` that stops quietly when stdout is closed.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser, Debug)]
#[command(
    name = "lq-turnpike",
    version,
    about = "Turnpike expansion of linear-quadratic value functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file in JSON format
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "example")]
    input: Option<PathBuf>,

    /// Built-in example: scalar, double_integrator, oscillator_chain, heat_chain
    #[arg(long, global = true, value_name = "NAME")]
    example: Option<String>,

    /// Size parameter of oscillator_chain and heat_chain
    #[arg(long, global = true, value_name = "INT")]
    size: Option<usize>,

    /// Horizon (defaults to the problem's T)
    #[arg(long = "T", global = true, value_name = "FLOAT")]
    horizon: Option<f64>,

    /// Comma-separated sweep horizons
    #[arg(
        long = "T-grid",
        global = true,
        value_name = "CSV",
        value_delimiter = ','
    )]
    t_grid: Option<Vec<f64>>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Uniform trajectory samples
    #[arg(long, global = true, value_name = "INT")]
    samples: Option<usize>,

    /// Worker threads for sweeps
    #[arg(long, global = true, value_name = "INT", default_value_t = 1)]
    jobs: usize,

    /// Tolerance override, repeatable
    #[arg(long = "tol-override", global = true, value_name = "KEY=VAL")]
    tol_override: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check the hypotheses of the chosen regime
    Validate,
    /// Turnpike triple and static value
    Static,
    /// Riccati solutions, closed loops and decay rate
    Riccati,
    /// Exact finite-horizon solve; writes trajectory.csv
    Solve,
    /// Horizon sweep and residual fit; writes sweep.csv and summary.json
    Sweep,
    /// Full numerical verification; nonzero exit on any failed check
    Verify,
    /// Every output of the other commands in one directory
    Report,
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let (code, kind) = match &err {
            Error::Parse(_) => (3, "parse"),
            Error::Io(_) => (3, "io"),
            Error::UnknownExample(_) => (3, "unknown_example"),
            Error::DimensionMismatch(_) => (1, "dimension_mismatch"),
            Error::InvalidArgument(_) => (1, "invalid_argument"),
            Error::RegimeMismatch { .. } => (1, "regime_mismatch"),
            Error::NoConvergence { .. } => (2, "no_convergence"),
            Error::SplitMismatch { .. } => (2, "split_mismatch"),
            Error::BoundaryEigenvalue { .. } => (2, "boundary_eigenvalue"),
            Error::ReorderFailed { .. } => (2, "reorder_failed"),
            Error::Overflow => (2, "overflow"),
            Error::SingularSylvester { .. } => (2, "singular_sylvester"),
            Error::SingularKkt { .. } => (2, "singular_kkt"),
            Error::HamiltonianAxisEigenvalue { .. } => (2, "hamiltonian_axis_eigenvalue"),
            Error::SubspaceSingular { .. } => (2, "subspace_singular"),
            Error::IntertwiningViolation { .. } => (2, "intertwining_violation"),
            Error::IllConditionedIpe { .. } => (2, "ill_conditioned_ipe"),
            Error::SingularBoundarySystem { .. } => (2, "singular_boundary_system"),
            Error::SingularQp => (2, "singular_qp"),
            Error::GridTooCoarse { .. } => (1, "grid_too_coarse"),
            Error::FitFloorReached { .. } => (2, "fit_floor_reached"),
        };
        Failure {
            code,
            kind,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Error::from(err).into()
    }
}

fn failure(code: u8, kind: &'static str, message: impl Into<String>) -> Failure {
    Failure {
        code,
        kind,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let message = err.render().to_string();
            let first = message.lines().next().unwrap_or("usage error").to_string();
            eprintln!(
                "{}",
                json!({"error": "usage", "message": first, "exit_code": 3})
            );
            return ExitCode::from(3);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!(
                "{}",
                json!({"error": f.kind, "message": f.message, "exit_code": f.code})
            );
            ExitCode::from(f.code)
        }
    }
}

struct Context {
    problem: LqProblem,
    boundary: BoundaryData,
    tol: Tolerances,
    grid: GridSpec,
    out: Option<PathBuf>,
}

fn load(cli: &Cli) -> CliResult<Context> {
    let (problem, mut boundary) = match (&cli.input, &cli.example) {
        (Some(path), None) => {
            if cli.size.is_some() {
                return Err(failure(
                    3,
                    "usage",
                    "--size only applies to built-in examples",
                ));
            }
            load_problem_file(path)?
        }
        (None, Some(name)) => builtin_example(name, cli.size)?,
        _ => {
            return Err(failure(
                3,
                "usage",
                "exactly one of --input or --example is required",
            ))
        }
    };
    if let Some(t) = cli.horizon {
        if !(t > 0.0) || !t.is_finite() {
            return Err(failure(
                1,
                "invalid_argument",
                format!("--T must be positive, got {t}"),
            ));
        }
        boundary.t = t;
    }
    let mut tol = Tolerances::default();
    for spec in &cli.tol_override {
        tol.apply_override(spec)?;
    }
    let mut grid = GridSpec::default();
    if let Some(samples) = cli.samples {
        grid.samples = samples;
    }
    if let Some(grid_t) = &cli.t_grid {
        if grid_t.is_empty() {
            return Err(failure(1, "invalid_argument", "--T-grid must not be empty"));
        }
    }
    if cli.jobs == 0 {
        return Err(failure(1, "invalid_argument", "--jobs must be at least 1"));
    }
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
    }
    Ok(Context {
        problem,
        boundary,
        tol,
        grid,
        out: cli.out.clone(),
    })
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes `value` to `out/name` when an output directory is set and prints
/// it on stdout otherwise.
fn emit_json(ctx: &Context, name: &str, value: &serde_json::Value) -> CliResult<()> {
    match &ctx.out {
        Some(dir) => {
            let mut w = create(dir, name)?;
            write_json(value, &mut w)?;
            w.flush()?;
        }
        None => out!("{}", to_json_string(value)?),
    }
    Ok(())
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn out_dir(ctx: &Context) -> PathBuf {
    ctx.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: &Cli) -> CliResult<u8> {
    let ctx = load(cli)?;
    match cli.command {
        Command::Validate => {
            let report = validate_with(&ctx.problem, &ctx.tol)?;
            emit_json(&ctx, "validation.json", &json!(report))?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Static => {
            let analysis = analysis(&ctx)?;
            emit_json(&ctx, "static.json", &static_json(&analysis))?;
            Ok(0)
        }
        Command::Riccati => {
            let analysis = analysis(&ctx)?;
            emit_json(&ctx, "riccati.json", &riccati_json(&analysis)?)?;
            Ok(0)
        }
        Command::Solve => {
            let analysis = analysis(&ctx)?;
            let dir = out_dir(&ctx);
            fs::create_dir_all(&dir)?;
            let line = solve_to(&analysis, &ctx, &dir)?;
            out!("{line}");
            Ok(0)
        }
        Command::Sweep => {
            let analysis = analysis(&ctx)?;
            let dir = out_dir(&ctx);
            fs::create_dir_all(&dir)?;
            let report = analysis.sweep(&sweep_grid(cli, &analysis)?, &sweep_options(cli, &ctx))?;
            write_sweep(&report, &dir)?;
            out!("{}", sweep_line(&report));
            Ok(0)
        }
        Command::Verify => {
            let analysis = analysis(&ctx)?;
            let dir = out_dir(&ctx);
            fs::create_dir_all(&dir)?;
            let report = run_verification(&analysis, &sweep_options(cli, &ctx))?;
            write_sweep(&report.expansion, &dir)?;
            let mut w = create(&dir, "verify.json")?;
            write_json(&report, &mut w)?;
            w.flush()?;
            for c in report.validation.checks.iter().chain(&report.checks) {
                out!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            out!("{}", sweep_line(&report.expansion));
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Report => {
            let dir = out_dir(&ctx);
            fs::create_dir_all(&dir)?;
            fs::write(
                dir.join("problem.json"),
                problem_to_json(&ctx.problem, &ctx.boundary)? + "\n",
            )?;
            let validation = validate_with(&ctx.problem, &ctx.tol)?;
            let mut w = create(&dir, "validation.json")?;
            write_json(&validation, &mut w)?;
            w.flush()?;
            let analysis = analysis(&ctx)?;
            let mut w = create(&dir, "static.json")?;
            write_json(&static_json(&analysis), &mut w)?;
            w.flush()?;
            let mut w = create(&dir, "riccati.json")?;
            write_json(&riccati_json(&analysis)?, &mut w)?;
            w.flush()?;
            solve_to(&analysis, &ctx, &dir)?;
            let report = analysis.sweep(&sweep_grid(cli, &analysis)?, &sweep_options(cli, &ctx))?;
            write_sweep(&report, &dir)?;
            out!("{}", sweep_line(&report));
            Ok(if validation.passed() { 0 } else { 1 })
        }
    }
}

fn analysis(ctx: &Context) -> CliResult<Analysis> {
    Ok(Analysis::with_tolerances(
        ctx.problem.clone(),
        ctx.boundary.clone(),
        ctx.tol.clone(),
    )?)
}

fn sweep_grid(cli: &Cli, analysis: &Analysis) -> CliResult<Vec<f64>> {
    match &cli.t_grid {
        Some(g) => Ok(g.clone()),
        None => Ok(analysis.t_grid()?),
    }
}

fn sweep_options(cli: &Cli, ctx: &Context) -> SweepOptions {
    SweepOptions {
        grid: ctx.grid,
        jobs: cli.jobs,
    }
}

fn static_json(analysis: &Analysis) -> serde_json::Value {
    let s = &analysis.static_solution;
    let r = kkt_residuals(&analysis.problem, s);
    json!({
        "y_bar": s.y_bar,
        "u_bar": s.u_bar,
        "lambda_bar": s.lambda_bar,
        "V_bar": s.v_bar,
        "multiplier_unique": s.multiplier_unique,
        "kkt_condition": s.kkt_condition,
        "residuals": r,
    })
}

fn riccati_json(analysis: &Analysis) -> CliResult<serde_json::Value> {
    let problem = &analysis.problem;
    let r = &analysis.riccati;
    let history = stabilizing_solution(problem)?.residual_history;
    let mut value = json!({
        "P": rows(&r.p),
        "A_minus": rows(&r.a_minus),
        "nu": r.nu,
        "residual_P": max_abs(&are_residual(problem, &r.p)?),
        "residual_history_P": history,
    });
    if let (Some(n), Some(a_plus), Some(delta)) = (&r.n, &r.a_plus, &r.delta) {
        value["N"] = json!(rows(n));
        value["A_plus"] = json!(rows(a_plus));
        value["Delta"] = json!(rows(delta));
        value["residual_N"] = json!(max_abs(&are_residual(problem, n)?));
        value["intertwining_residual"] =
            json!(max_abs(&(delta * &r.a_minus + a_plus.transpose() * delta)));
        value["spectral_mirror_gap"] = json!(spectral_mirror_gap(r)?);
    }
    if let Some(aux) = &analysis.aux {
        value["E"] = json!(rows(&aux.e));
        value["w_inf"] = json!(aux.w_inf.as_slice());
        value["ipe_condition"] = json!(aux.ipe_condition);
        value["w_inf_source"] = json!(aux.source);
        value["mu"] = json!(analysis.mu);
    }
    Ok(value)
}

/// Writes `trajectory.csv` and returns the one-line JSON summary.
fn solve_to(analysis: &Analysis, ctx: &Context, dir: &Path) -> CliResult<String> {
    let horizon = ctx.boundary.t;
    let sol = analysis.solve(horizon)?;
    let traj = sol.sample(&ctx.grid.build(horizon)?)?;
    let mut w = create(dir, "trajectory.csv")?;
    write_trajectory_csv(&traj, &mut w)?;
    w.flush()?;
    Ok(json!({
        "T": horizon,
        "V_T": sol.cost(),
        "predictor": analysis.predictor.eval(horizon),
        "method": sol.method(),
        "samples": traj.grid.len(),
    })
    .to_string())
}

fn write_sweep(report: &lq_turnpike::ExpansionReport, dir: &Path) -> CliResult<()> {
    let mut w = create(dir, "sweep.csv")?;
    write_sweep_csv(report, &mut w)?;
    w.flush()?;
    let mut w = create(dir, "summary.json")?;
    write_summary_json(report, &mut w)?;
    w.flush()?;
    Ok(())
}

fn sweep_line(report: &lq_turnpike::ExpansionReport) -> String {
    json!({
        "nu_theory": report.nu_theory,
        "nu_fit": report.nu_fit,
        "fit_quality": report.fit_quality,
        "fit_status": report.fit_status,
        "predictor_constant": report.predictor.constant,
        "points": report.sweep.len(),
    })
    .to_string()
}
