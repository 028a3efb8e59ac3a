mod common;

use lq_turnpike::linalg::Matrix;
use lq_turnpike::model::{builtin_example, load_problem, problem_to_json, validate};
use lq_turnpike::{Error, LqProblem, Regime};

use common::*;

fn parse(text: &str) -> lq_turnpike::Result<(LqProblem, lq_turnpike::BoundaryData)> {
    load_problem(text.as_bytes())
}

#[test]
fn builtin_examples_round_trip_bit_for_bit() {
    for (name, p, b) in all_examples() {
        let text = problem_to_json(&p, &b).unwrap();
        let (p2, b2) = parse(&text).unwrap();
        assert_eq!(p, p2, "{name}");
        assert_eq!(b, b2, "{name}");
        assert_eq!(problem_to_json(&p2, &b2).unwrap(), text, "{name}");
    }
}

#[test]
fn random_problems_round_trip() {
    let mut r = rng(11);
    for n in 1..=5 {
        let (p, b) = random_fixed(&mut r, n, 1);
        let (p2, b2) = parse(&problem_to_json(&p, &b).unwrap()).unwrap();
        assert_eq!((p, b), (p2, b2));
    }
}

const SCALAR: &str = r#"{"A": [[0]], "B": [[1]], "Q": [[1]], "R": [[1]],
    "y_d": [1], "u_d": [0], "y0": [0], "y1": [2], "T": 10, "regime": "fixed"}"#;

#[test]
fn minimal_file_parses() {
    let (p, b) = parse(SCALAR).unwrap();
    assert_eq!(p.regime, Regime::FixedEndpoints);
    assert_eq!(b.t, 10.0);
    assert_eq!(p, builtin_example("scalar", None).unwrap().0);
}

#[test]
fn malformed_files_are_parse_errors() {
    let cases = [
        SCALAR.replace("\"fixed\"", "\"periodic\""),
        SCALAR.replace(", \"y1\": [2]", ""),
        SCALAR.replace("\"fixed\"", "\"free\""),
        SCALAR.replace("\"T\": 10", "\"T\": -1"),
        SCALAR.replace("\"Q\": [[1]]", "\"Q\": [[1], [1, 2]]"),
        SCALAR.replace("\"regime\"", "\"extra\": 1, \"regime\""),
        "{".to_string(),
    ];
    for text in cases {
        assert!(matches!(parse(&text), Err(Error::Parse(_))), "{text}");
    }
}

#[test]
fn inconsistent_dimensions_are_rejected() {
    let text = SCALAR.replace("\"B\": [[1]]", "\"B\": [[1], [1]]");
    assert!(matches!(parse(&text), Err(Error::DimensionMismatch(_))));
}

#[test]
fn example_definitions() {
    let (p, _) = builtin_example("double_integrator", None).unwrap();
    assert_eq!(p.a, Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    for k in 1..=4 {
        let (p, b) = builtin_example("oscillator_chain", Some(k)).unwrap();
        assert_eq!((p.n(), b.y0.len()), (2 * k, 2 * k));
        assert!(validate(&p).unwrap().passed());
    }
    for k in 1..=6 {
        let (p, _) = builtin_example("heat_chain", Some(k)).unwrap();
        assert_eq!(p.regime, Regime::FreeFinalState);
        assert!(validate(&p).unwrap().passed());
    }
    assert!(matches!(
        builtin_example("pendulum", None),
        Err(Error::UnknownExample(_))
    ));
}

#[test]
fn uncontrollable_mode_fails_validation() {
    let p = LqProblem::new(
        Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
        Matrix::identity(2, 2),
        Matrix::identity(1, 1),
        lq_turnpike::linalg::Vector::zeros(2),
        lq_turnpike::linalg::Vector::zeros(1),
        Regime::FreeFinalState,
    )
    .unwrap();
    let report = validate(&p).unwrap();
    assert!(!report.passed());
    assert!(!report.failures().is_empty());
}

#[test]
fn indefinite_weights_fail_validation() {
    let (mut p, _) = builtin_example("scalar", None).unwrap();
    p.r = Matrix::from_element(1, 1, -1.0);
    let ok = validate(&p).map(|r| r.passed()).unwrap_or(false);
    assert!(!ok);
}
