use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used across the pipeline. Every field can be
/// overridden by name through [`Tolerances::set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for Kalman and Hautus rank tests.
    pub rank_tol: f64,
    /// Allowed asymmetry of Q and R, relative to their largest entry.
    pub symmetry_tol: f64,
    /// Negative eigenvalues of Q above `-sqrt_clamp` are treated as zero.
    pub sqrt_clamp: f64,
    /// Condition estimate beyond which the static KKT matrix is singular.
    pub kkt_condition: f64,
    /// Condition estimate beyond which `I + PE` is not inverted directly.
    pub ipe_condition: f64,
    /// Condition estimate beyond which a boundary system is singular.
    pub boundary_condition: f64,
    /// Multiple of machine epsilon in the residual floor.
    pub floor_factor: f64,
    /// Required `nu_fit / nu`.
    pub rate_fraction: f64,
    /// Required coefficient of determination of the residual fit.
    pub fit_r2: f64,
    /// Required `-slope / nu` of the trajectory prediction error.
    pub trajectory_rate_fraction: f64,
    /// Largest allowed ratio between turnpike constants across the sweep.
    pub turnpike_ratio: f64,
    /// Relative error allowed between finite differences and costates.
    pub gradient_tol: f64,
    /// Relative error allowed in the dynamic-programming splice.
    pub splice_tol: f64,
    /// Allowed `|λ_T(T)|` in the free-endpoint regime.
    pub transversality_tol: f64,
    /// Ergodic constant agreement, in units of the residual floor.
    pub mu_floor_multiple: f64,
    /// Relative gap allowed between the exact and transcribed costs.
    pub transcription_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            symmetry_tol: 1e-12,
            sqrt_clamp: 1e-12,
            kkt_condition: 1e14,
            ipe_condition: 1e12,
            boundary_condition: 1e14,
            floor_factor: 1e3,
            rate_fraction: 0.9,
            fit_r2: 0.98,
            trajectory_rate_fraction: 1.5,
            turnpike_ratio: 2.0,
            gradient_tol: 1e-6,
            splice_tol: 1e-8,
            transversality_tol: 1e-9,
            mu_floor_multiple: 10.0,
            transcription_tol: 1e-5,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 16] = [
        "rank_tol",
        "symmetry_tol",
        "sqrt_clamp",
        "kkt_condition",
        "ipe_condition",
        "boundary_condition",
        "floor_factor",
        "rate_fraction",
        "fit_r2",
        "trajectory_rate_fraction",
        "turnpike_ratio",
        "gradient_tol",
        "splice_tol",
        "transversality_tol",
        "mu_floor_multiple",
        "transcription_tol",
    ];

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance {key} must be finite and nonnegative"
            )));
        }
        let slot = match key {
            "rank_tol" => &mut self.rank_tol,
            "symmetry_tol" => &mut self.symmetry_tol,
            "sqrt_clamp" => &mut self.sqrt_clamp,
            "kkt_condition" => &mut self.kkt_condition,
            "ipe_condition" => &mut self.ipe_condition,
            "boundary_condition" => &mut self.boundary_condition,
            "floor_factor" => &mut self.floor_factor,
            "rate_fraction" => &mut self.rate_fraction,
            "fit_r2" => &mut self.fit_r2,
            "trajectory_rate_fraction" => &mut self.trajectory_rate_fraction,
            "turnpike_ratio" => &mut self.turnpike_ratio,
            "gradient_tol" => &mut self.gradient_tol,
            "splice_tol" => &mut self.splice_tol,
            "transversality_tol" => &mut self.transversality_tol,
            "mu_floor_multiple" => &mut self.mu_floor_multiple,
            "transcription_tol" => &mut self.transcription_tol,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown tolerance `{key}` (known: {})",
                    Self::KEYS.join(", ")
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    /// Parses `KEY=VALUE` and applies it.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected KEY=VALUE, got `{spec}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("`{value}` is not a number")))?;
        self.set(key.trim(), value)
    }
}
