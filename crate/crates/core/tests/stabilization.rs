mod common;

use lq_turnpike::linalg::Vector;
use lq_turnpike::stabilization::{
    backward_dissipation_integral, feedback_cost, forward_dissipation_integral, forward_value,
};
use lq_turnpike::{Analysis, BoundaryData};

use common::*;

#[test]
fn dissipation_integrals_reach_the_dissipative_values() {
    for (name, p, b) in all_examples() {
        let a = Analysis::new(p.clone(), b.clone()).unwrap();
        let t_cut = 60.0 / a.nu();
        let v_f =
            forward_dissipation_integral(&p, &a.static_solution, &a.riccati, &b.y0, t_cut).unwrap();
        let want = a.stabilization.v_f;
        assert!(
            (v_f - want).abs() <= 1e-9 * (1.0 + want.abs()),
            "{name}: V_f {v_f} vs {want}"
        );
        if let Some(y1) = &b.y1 {
            let v_b = backward_dissipation_integral(&p, &a.static_solution, &a.riccati, y1, t_cut)
                .unwrap();
            let want = a.stabilization.v_b.unwrap();
            assert!(
                (v_b - want).abs() <= 1e-9 * (1.0 + want.abs()),
                "{name}: V_b {v_b} vs {want}"
            );
        }
    }
}

#[test]
fn dissipative_values_shift_by_the_supply_rate() {
    let mut r = rng(23);
    for n in 1..=5 {
        let (p, b) = random_fixed(&mut r, n, 1);
        let a = Analysis::new(p, b.clone()).unwrap();
        let s = &a.stabilization;
        let lambda_bar = a.static_solution.lambda();
        let y_bar = a.static_solution.y();
        assert!(
            (s.v_f - (s.s_f - lambda_bar.dot(&(&b.y0 - &y_bar)))).abs()
                < 1e-12 * (1.0 + s.s_f.abs())
        );
        let y1 = b.y1.as_ref().unwrap();
        let v_b = s.v_b.unwrap();
        assert!(
            (v_b - (s.s_b.unwrap() + lambda_bar.dot(&(y1 - &y_bar)))).abs()
                < 1e-12 * (1.0 + v_b.abs())
        );
        assert!(s.s_f >= 0.0 && s.s_b.unwrap() >= 0.0);
    }
}

/// `½⟨Pz, z⟩` is the cost of the optimal feedback; any other stabilizing
/// gain costs more, by `O(ε²)` for a perturbation of size `ε`.
#[test]
fn optimal_feedback_beats_perturbed_gains() {
    let mut r = rng(29);
    for n in 1..=5 {
        let (p, b) = random_fixed(&mut r, n, 1);
        let a = Analysis::new(p.clone(), b).unwrap();
        let t_cut = 60.0 / a.nu();
        let gain = p.r_inv().unwrap() * p.b.transpose() * &a.riccati.p;
        let z0 = uniform_vec(&mut r, n);
        let optimal = feedback_cost(&p, &gain, &z0, t_cut).unwrap();
        let want = forward_value(&a.riccati.p, &Vector::zeros(n), &z0);
        assert!(
            (optimal - want).abs() <= 1e-9 * (1.0 + want),
            "n={n}: {optimal} vs {want}"
        );
        let direction = uniform(&mut r, 1, n);
        let excess = |eps: f64| {
            feedback_cost(&p, &(&gain + &direction * eps), &z0, t_cut).unwrap() - optimal
        };
        let (small, double) = (excess(1e-3), excess(2e-3));
        assert!(small > 0.0 && double > 0.0, "n={n}: {small:e} {double:e}");
        assert!(
            (double / small - 4.0).abs() < 0.05,
            "n={n}: ratio {}",
            double / small
        );
    }
}

#[test]
fn scalar_stabilization_values() {
    // P = 1, N = −1, ȳ = 1, λ̄ = 0: S_f = ½(y0 − 1)², S_b = ½(y1 − 1)²
    let (p, _) = lq_turnpike::model::builtin_example("scalar", None).unwrap();
    let b = BoundaryData {
        y0: Vector::from_element(1, -2.0),
        y1: Some(Vector::from_element(1, 4.0)),
        t: 10.0,
    };
    let a = Analysis::new(p, b).unwrap();
    assert!((a.stabilization.s_f - 4.5).abs() < 1e-14);
    assert!((a.stabilization.s_b.unwrap() - 4.5).abs() < 1e-14);
    assert_eq!(a.stabilization.v_f, a.stabilization.s_f);
}
