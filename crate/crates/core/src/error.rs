use thiserror::Error;

/// Errors raised by the library.
///
/// Failed validation checks are not errors; they are reported in a
/// [`ValidationReport`](crate::model::ValidationReport).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown example `{0}` (expected one of scalar, double_integrator, oscillator_chain, heat_chain)")]
    UnknownExample(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation requires the {expected} regime")]
    RegimeMismatch { expected: &'static str },

    #[error("QR iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("expected {expected} selected eigenvalues, found {found}")]
    SplitMismatch { expected: usize, found: usize },

    #[error("eigenvalue {re:e}{im:+e}i lies within {tol:e} of the selection boundary")]
    BoundaryEigenvalue { re: f64, im: f64, tol: f64 },

    #[error("Schur block swap failed (residual {residual:e})")]
    ReorderFailed { residual: f64 },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("Sylvester operator is singular (condition estimate {condition:e})")]
    SingularSylvester { condition: f64 },

    #[error("static KKT matrix is numerically singular (condition estimate {condition:e})")]
    SingularKkt { condition: f64 },

    #[error("Hamiltonian eigenvalue {re:e}{im:+e}i is on the imaginary axis")]
    HamiltonianAxisEigenvalue { re: f64, im: f64 },

    #[error("invariant subspace basis is not a graph (condition estimate {condition:e})")]
    SubspaceSingular { condition: f64 },

    #[error("P and N are inconsistent: intertwining residual {residual:e}")]
    IntertwiningViolation { residual: f64 },

    #[error("id + PE is ill-conditioned (condition estimate {condition:e}) and the limit sequence did not settle")]
    IllConditionedIpe { condition: f64 },

    #[error("boundary system is numerically singular (condition estimate {condition:e})")]
    SingularBoundarySystem { condition: f64 },

    #[error("transcribed quadratic program is singular")]
    SingularQp,

    #[error("at least 3 samples are required, got {samples}")]
    GridTooCoarse { samples: usize },

    #[error("only {above_floor} sweep residuals exceed the rounding floor")]
    FitFloorReached { above_floor: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
