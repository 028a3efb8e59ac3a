//! Large-horizon asymptotics of linear-quadratic optimal control.
//!
//! For `ẏ = Ay + Bu` with running cost `½(‖y − y_d‖²_Q + ‖u − u_d‖²_R)`,
//! the optimal value over `[0, T]` behaves like `T·V̄ + constant` up to an
//! exponentially small remainder, where `V̄` is the value of the static
//! problem at the turnpike `(ȳ, ū)`. This crate computes every term of that
//! expansion, solves the finite-horizon problems exactly and measures the
//! remainders.
//!
//! ```
//! use lq_turnpike::{builtin_example, Analysis};
//!
//! let (problem, boundary) = builtin_example("scalar", None).unwrap();
//! let analysis = Analysis::new(problem, boundary).unwrap();
//! assert!((analysis.predictor.constant - 2.5).abs() < 1e-12);
//! let v = analysis.solve(20.0).unwrap().cost();
//! assert!((v - 2.5).abs() < 1e-8);
//! ```

pub mod error;
pub mod expansion;
pub mod finite_horizon;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod riccati;
pub mod stabilization;
pub mod static_turnpike;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use expansion::{sweep_and_fit, ExpansionReport, SweepOptions};
pub use finite_horizon::{direct_transcription, ExactSolution, GridSpec, Trajectory};
pub use model::{
    builtin_example, load_problem, validate, BoundaryData, LqProblem, Regime, ValidationReport,
};
pub use pipeline::Analysis;
pub use riccati::{solve_riccati, RiccatiPair};
pub use static_turnpike::{solve_static, StaticSolution};
pub use tolerances::Tolerances;
pub use verify::{run_verification, VerificationReport};
