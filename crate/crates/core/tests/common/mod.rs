#![allow(dead_code)]

use lq_turnpike::linalg::{Matrix, Vector};
use lq_turnpike::model::{builtin_example, validate};
use lq_turnpike::{BoundaryData, LqProblem, Regime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// `LLᵀ + shift·I` with `L` uniform.
pub fn spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Matrix {
    let l = uniform(rng, n, n);
    &l * l.transpose() + Matrix::identity(n, n) * shift
}

/// Random fixed-endpoint problem that passes validation, with boundary data.
pub fn random_fixed(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (LqProblem, BoundaryData) {
    loop {
        let problem = LqProblem::new(
            uniform(rng, n, n),
            uniform(rng, n, m),
            spd(rng, n, 0.1),
            spd(rng, m, 0.1),
            uniform_vec(rng, n),
            uniform_vec(rng, m),
            Regime::FixedEndpoints,
        )
        .unwrap();
        if validate(&problem).unwrap().passed() {
            let boundary = BoundaryData {
                y0: uniform_vec(rng, n),
                y1: Some(uniform_vec(rng, n)),
                t: 5.0,
            };
            return (problem, boundary);
        }
    }
}

/// `ẏ = −y + u`, `Q = R = 1`, `y_d = 2`, `u_d = 0`, free final state, from `y0 = 0`.
pub fn heat_like() -> (LqProblem, BoundaryData) {
    let one = Matrix::from_element(1, 1, 1.0);
    let problem = LqProblem::new(
        -one.clone(),
        one.clone(),
        one.clone(),
        one,
        Vector::from_element(1, 2.0),
        Vector::zeros(1),
        Regime::FreeFinalState,
    )
    .unwrap();
    let boundary = BoundaryData {
        y0: Vector::zeros(1),
        y1: None,
        t: 10.0,
    };
    (problem, boundary)
}

pub fn fixed_examples() -> Vec<(&'static str, LqProblem, BoundaryData)> {
    ["scalar", "double_integrator", "oscillator_chain"]
        .into_iter()
        .map(|name| {
            let (p, b) = builtin_example(name, None).unwrap();
            (name, p, b)
        })
        .collect()
}

pub fn all_examples() -> Vec<(&'static str, LqProblem, BoundaryData)> {
    let mut v = fixed_examples();
    let (p, b) = builtin_example("heat_chain", None).unwrap();
    v.push(("heat_chain", p, b));
    v
}

/// Optimal cost of the scalar example (`ẏ = u`, `Q = R = 1`, turnpike 1)
/// from `y0` to `y1`: with `z = y − 1`,
/// `V_T = (z0² cosh T − 2 z0 z1 + z1² cosh T) / (2 sinh T)`.
pub fn scalar_value(y0: f64, y1: f64, t: f64) -> f64 {
    let (z0, z1) = (y0 - 1.0, y1 - 1.0);
    ((z0 * z0 + z1 * z1) * t.cosh() - 2.0 * z0 * z1) / (2.0 * t.sinh())
}

/// `∂V_T/∂y0` of [`scalar_value`].
pub fn scalar_value_dy0(y0: f64, y1: f64, t: f64) -> f64 {
    ((y0 - 1.0) * t.cosh() - (y1 - 1.0)) / t.sinh()
}

/// Composite Simpson rule with `panels` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `V_T(ȳ) − T·V̄` of [`heat_like`] by quadrature of the closed-form
/// extremal. With `M = [[−1, 1], [1, 1]]`, `M² = 2I`, so
/// `e^{tM} = cosh(√2t)I + sinh(√2t)/√2·M`; the deviations from the turnpike
/// `(ȳ, ū, λ̄) = (1, 1, 1)` start at `(0, p0)` and `λ(T) = 0` fixes `p0`.
pub fn heat_like_offset(t_end: f64) -> f64 {
    let r2 = 2f64.sqrt();
    let c = |t: f64| (r2 * t).cosh();
    let s = |t: f64| (r2 * t).sinh() / r2;
    let p0 = -1.0 / (c(t_end) + s(t_end));
    let running = |t: f64| {
        let z = s(t) * p0;
        let p = (c(t) + s(t)) * p0;
        let y = 1.0 + z;
        let u = 1.0 + p;
        0.5 * (y - 2.0).powi(2) + 0.5 * u * u
    };
    simpson(running, 0.0, t_end, 200_000) - t_end
}
