//! Problem data, hypothesis checks, JSON serialization and built-in examples.

mod examples;
mod io;

pub use examples::{builtin_example, EXAMPLE_NAMES};
pub use io::{load_problem, load_problem_file, problem_to_json, save_problem, save_problem_file};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, max_abs, symmetric_eigenvalues, symmetrize, Lu, Matrix, Vector};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Both `y(0)` and `y(T)` are prescribed.
    FixedEndpoints,
    /// Only `y(0)` is prescribed.
    FreeFinalState,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FixedEndpoints => "fixed",
            Regime::FreeFinalState => "free",
        }
    }
}

/// `ẏ = Ay + Bu` with running cost `½(‖y − y_d‖²_Q + ‖u − u_d‖²_R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqProblem {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    pub r: Matrix,
    pub y_d: Vector,
    pub u_d: Vector,
    pub regime: Regime,
}

/// Endpoint data and horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub y0: Vector,
    pub y1: Option<Vector>,
    pub t: f64,
}

impl LqProblem {
    pub fn new(
        a: Matrix,
        b: Matrix,
        q: Matrix,
        r: Matrix,
        y_d: Vector,
        u_d: Vector,
        regime: Regime,
    ) -> Result<Self> {
        let problem = Self {
            a,
            b,
            q,
            r,
            y_d,
            u_d,
            regime,
        };
        problem.check_dimensions()?;
        Ok(problem)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.a.nrows();
        let m = self.b.ncols();
        let mut bad = Vec::new();
        if self.a.ncols() != n {
            bad.push(format!("A is {}x{}", n, self.a.ncols()));
        }
        if self.b.nrows() != n {
            bad.push(format!("B has {} rows, A has {}", self.b.nrows(), n));
        }
        if self.q.shape() != (n, n) {
            bad.push(format!(
                "Q is {}x{}, expected {n}x{n}",
                self.q.nrows(),
                self.q.ncols()
            ));
        }
        if self.r.shape() != (m, m) {
            bad.push(format!(
                "R is {}x{}, expected {m}x{m}",
                self.r.nrows(),
                self.r.ncols()
            ));
        }
        if self.y_d.len() != n {
            bad.push(format!("y_d has length {}, expected {n}", self.y_d.len()));
        }
        if self.u_d.len() != m {
            bad.push(format!("u_d has length {}, expected {m}", self.u_d.len()));
        }
        if n == 0 || m == 0 {
            bad.push("state and control dimensions must be positive".into());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(bad.join("; ")))
        }
    }

    pub fn check_boundary(&self, boundary: &BoundaryData) -> Result<()> {
        let n = self.n();
        if boundary.y0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "y0 has length {}, expected {n}",
                boundary.y0.len()
            )));
        }
        match (&boundary.y1, self.regime) {
            (Some(y1), Regime::FixedEndpoints) if y1.len() != n => {
                return Err(Error::DimensionMismatch(format!(
                    "y1 has length {}, expected {n}",
                    y1.len()
                )))
            }
            (None, Regime::FixedEndpoints) => {
                return Err(Error::InvalidArgument(
                    "the fixed regime needs a final state y1".into(),
                ))
            }
            (Some(_), Regime::FreeFinalState) => {
                return Err(Error::InvalidArgument(
                    "the free regime takes no final state y1".into(),
                ))
            }
            _ => {}
        }
        if !(boundary.t > 0.0) || !boundary.t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon T must be positive, got {}",
                boundary.t
            )));
        }
        Ok(())
    }

    pub fn r_inv(&self) -> Result<Matrix> {
        symmetrize_inverse(&self.r)
    }

    /// `B R⁻¹ Bᵀ`
    pub fn s(&self) -> Result<Matrix> {
        Ok(symmetrize(&(&self.b * self.r_inv()? * self.b.transpose())))
    }

    /// `½(‖y − y_d‖²_Q + ‖u − u_d‖²_R)`
    pub fn running_cost(&self, y: &Vector, u: &Vector) -> f64 {
        let dy = y - &self.y_d;
        let du = u - &self.u_d;
        0.5 * (dy.dot(&(&self.q * &dy)) + du.dot(&(&self.r * &du)))
    }

    /// The same problem with a different regime.
    pub fn with_regime(&self, regime: Regime) -> Self {
        Self {
            regime,
            ..self.clone()
        }
    }
}

fn symmetrize_inverse(m: &Matrix) -> Result<Matrix> {
    let inv = Lu::new(m)?
        .inverse()
        .map_err(|_| Error::InvalidArgument("R is singular".into()))?;
    Ok(symmetrize(&inv))
}

/// One hypothesis check. `margin` is positive when the check passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub regime: Regime,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn validate(problem: &LqProblem) -> Result<ValidationReport> {
    validate_with(problem, &Tolerances::default())
}

pub fn validate_with(problem: &LqProblem, tol: &Tolerances) -> Result<ValidationReport> {
    problem.check_dimensions()?;
    let mut checks = vec![
        symmetry_check("Q symmetric", &problem.q, tol.symmetry_tol),
        symmetry_check("R symmetric", &problem.r, tol.symmetry_tol),
    ];
    let r_min = symmetric_eigenvalues(&problem.r)[0];
    checks.push(Check {
        name: "R positive definite".into(),
        passed: r_min > 0.0,
        margin: r_min,
        detail: format!("smallest eigenvalue {r_min:e}"),
    });
    let q_min = symmetric_eigenvalues(&problem.q)[0];
    match problem.regime {
        Regime::FixedEndpoints => {
            checks.push(Check {
                name: "Q positive definite".into(),
                passed: q_min > 0.0,
                margin: q_min,
                detail: format!("smallest eigenvalue {q_min:e}"),
            });
            checks.push(kalman_check(&problem.a, &problem.b, tol.rank_tol));
        }
        Regime::FreeFinalState => {
            let floor = -tol.sqrt_clamp * max_abs(&problem.q).max(1.0);
            checks.push(Check {
                name: "Q positive semidefinite".into(),
                passed: q_min >= floor,
                margin: q_min - floor,
                detail: format!("smallest eigenvalue {q_min:e}"),
            });
            checks.push(hautus_check(
                "stabilizable",
                &problem.a,
                &problem.b,
                tol.rank_tol,
            )?);
            if q_min >= floor {
                let root = psd_sqrt(&problem.q, tol.sqrt_clamp);
                checks.push(hautus_check(
                    "detectable",
                    &problem.a.transpose(),
                    &root,
                    tol.rank_tol,
                )?);
            } else {
                checks.push(Check {
                    name: "Hautus detectable".into(),
                    passed: false,
                    margin: f64::NEG_INFINITY,
                    detail: "Q has no real square root".into(),
                });
            }
        }
    }
    Ok(ValidationReport {
        regime: problem.regime,
        checks,
    })
}

fn symmetry_check(name: &str, m: &Matrix, tol: f64) -> Check {
    let asym = crate::linalg::asymmetry(m);
    let allowed = tol * max_abs(m);
    Check {
        name: name.into(),
        passed: asym <= allowed,
        margin: allowed - asym,
        detail: format!("max asymmetry {asym:e}"),
    }
}

/// `[B, AB, …, A^{n−1}B]`
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    out
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &Matrix, rel_tol: f64) -> (usize, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return (0, 0.0);
    }
    let mut sorted: Vec<f64> = sv.iter().cloned().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rank = sorted.iter().filter(|s| **s > rel_tol * smax).count();
    let k = m.nrows().min(m.ncols());
    let smallest = sorted.get(k.saturating_sub(1)).cloned().unwrap_or(0.0);
    (rank, smallest / smax)
}

fn kalman_check(a: &Matrix, b: &Matrix, rank_tol: f64) -> Check {
    let n = a.nrows();
    let (rank, ratio) = numerical_rank(&controllability_matrix(a, b), rank_tol);
    Check {
        name: "Kalman rank".into(),
        passed: rank == n,
        margin: ratio - rank_tol,
        detail: format!("rank {rank} of {n}"),
    }
}

/// Hautus test of `rank [A − λI, B] = n` at every eigenvalue with
/// `Re λ ≥ 0` (up to rounding).
fn hautus_check(kind: &str, a: &Matrix, b: &Matrix, rank_tol: f64) -> Result<Check> {
    let n = a.nrows();
    let k = b.ncols();
    let cutoff = -1e-9 * max_abs(a).max(1.0);
    let mut worst = f64::INFINITY;
    let mut failing = Vec::new();
    for ev in eigenvalues(a)? {
        if ev.re < cutoff || ev.im < 0.0 {
            continue;
        }
        // real representation of the complex n×(n+k) pencil
        let mut re_part = Matrix::zeros(n, n + k);
        re_part
            .view_mut((0, 0), (n, n))
            .copy_from(&(a - Matrix::identity(n, n) * ev.re));
        re_part.view_mut((0, n), (n, k)).copy_from(b);
        let im_part = {
            let mut m = Matrix::zeros(n, n + k);
            m.view_mut((0, 0), (n, n)).fill_diagonal(-ev.im);
            m
        };
        let mut real = Matrix::zeros(2 * n, 2 * (n + k));
        real.view_mut((0, 0), (n, n + k)).copy_from(&re_part);
        real.view_mut((0, n + k), (n, n + k))
            .copy_from(&(-&im_part));
        real.view_mut((n, 0), (n, n + k)).copy_from(&im_part);
        real.view_mut((n, n + k), (n, n + k)).copy_from(&re_part);
        let sv = real.svd(false, false).singular_values;
        let mut sorted: Vec<f64> = sv.iter().cloned().collect();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let smax = sorted[0];
        // singular values of the real form come in equal pairs
        let ratio = if smax == 0.0 {
            0.0
        } else {
            sorted[2 * n - 1] / smax
        };
        worst = worst.min(ratio);
        if ratio <= rank_tol {
            failing.push(format!("{:.6e}{:+.6e}i", ev.re, ev.im));
        }
    }
    let name = format!("Hautus {kind}");
    Ok(if worst.is_infinite() {
        Check {
            name,
            passed: true,
            margin: f64::INFINITY,
            detail: "no eigenvalues in the closed right half plane".into(),
        }
    } else {
        Check {
            name,
            passed: failing.is_empty(),
            margin: worst - rank_tol,
            detail: if failing.is_empty() {
                "full rank at every unstable eigenvalue".into()
            } else {
                format!("rank deficient at {}", failing.join(", "))
            },
        }
    })
}

/// Symmetric square root with small negative eigenvalues clamped to zero.
pub fn psd_sqrt(q: &Matrix, clamp: f64) -> Matrix {
    let eig = symmetrize(q).symmetric_eigen();
    let scale = max_abs(q).max(1.0);
    let roots = eig.eigenvalues.map(|l| {
        if l >= 0.0 {
            l.sqrt()
        } else if l >= -clamp * scale {
            0.0
        } else {
            f64::NAN
        }
    });
    let v = &eig.eigenvectors;
    symmetrize(&(v * Matrix::from_diagonal(&roots) * v.transpose()))
}
