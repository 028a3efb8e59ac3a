use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundaryData, LqProblem, Regime};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::report::to_json_string;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    y_d: Vec<f64>,
    u_d: Vec<f64>,
    y0: Vec<f64>,
    #[serde(default)]
    y1: Option<Vec<f64>>,
    #[serde(rename = "T")]
    t: f64,
    regime: String,
}

#[derive(Serialize)]
struct ProblemFile<'a> {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    y_d: &'a [f64],
    u_d: &'a [f64],
    y0: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    y1: Option<&'a [f64]>,
    #[serde(rename = "T")]
    t: f64,
    regime: &'static str,
}

fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(Error::Parse(format!(
            "field \"{name}\": row {i} has {} entries, row 0 has {c}",
            row.len()
        )));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|row| row.iter().cloned().collect())
        .collect()
}

/// Reads a problem and its boundary data from JSON. Validation is not run.
pub fn load_problem(mut source: impl Read) -> Result<(LqProblem, BoundaryData)> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let raw: RawProblem = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let regime = match raw.regime.as_str() {
        "fixed" => Regime::FixedEndpoints,
        "free" => Regime::FreeFinalState,
        other => {
            return Err(Error::Parse(format!(
                "field \"regime\": expected \"fixed\" or \"free\", got \"{other}\""
            )))
        }
    };
    let problem = LqProblem::new(
        matrix_from_rows("A", &raw.a)?,
        matrix_from_rows("B", &raw.b)?,
        matrix_from_rows("Q", &raw.q)?,
        matrix_from_rows("R", &raw.r)?,
        Vector::from_vec(raw.y_d),
        Vector::from_vec(raw.u_d),
        regime,
    )?;
    let boundary = BoundaryData {
        y0: Vector::from_vec(raw.y0),
        y1: raw.y1.map(Vector::from_vec),
        t: raw.t,
    };
    match (regime, &boundary.y1) {
        (Regime::FixedEndpoints, None) => {
            return Err(Error::Parse(
                "field \"y1\" is required when regime is \"fixed\"".into(),
            ))
        }
        (Regime::FreeFinalState, Some(_)) => {
            return Err(Error::Parse(
                "field \"y1\" must be absent when regime is \"free\"".into(),
            ))
        }
        _ => {}
    }
    problem.check_boundary(&boundary).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Parse(format!("field \"T\": {msg}")),
        other => other,
    })?;
    Ok((problem, boundary))
}

pub fn load_problem_file(path: impl AsRef<Path>) -> Result<(LqProblem, BoundaryData)> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    load_problem(std::io::BufReader::new(file))
}

/// JSON text of the problem file, numbers with 17 significant digits.
pub fn problem_to_json(problem: &LqProblem, boundary: &BoundaryData) -> Result<String> {
    let file = ProblemFile {
        a: rows_of(&problem.a),
        b: rows_of(&problem.b),
        q: rows_of(&problem.q),
        r: rows_of(&problem.r),
        y_d: problem.y_d.as_slice(),
        u_d: problem.u_d.as_slice(),
        y0: boundary.y0.as_slice(),
        y1: boundary.y1.as_ref().map(|v| v.as_slice()),
        t: boundary.t,
        regime: problem.regime.as_str(),
    };
    to_json_string(&file)
}

pub fn save_problem(
    problem: &LqProblem,
    boundary: &BoundaryData,
    mut sink: impl Write,
) -> Result<()> {
    let text = problem_to_json(problem, boundary)?;
    sink.write_all(text.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn save_problem_file(
    problem: &LqProblem,
    boundary: &BoundaryData,
    path: impl AsRef<Path>,
) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    save_problem(problem, boundary, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOUBLE_INTEGRATOR: &str = r#"{
        "A": [[0, 1], [0, 0]], "B": [[0], [1]], "Q": [[1, 0], [0, 1]], "R": [[1]],
        "y_d": [1, 0], "u_d": [0], "y0": [2, 0], "y1": [1, 1], "T": 10, "regime": "fixed"
    }"#;

    #[test]
    fn parses_well_formed_file() {
        let (p, b) = load_problem(DOUBLE_INTEGRATOR.as_bytes()).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.m(), 1);
        assert_eq!(b.t, 10.0);
        assert_eq!(b.y1.unwrap()[1], 1.0);
    }

    #[test]
    fn missing_field_is_named() {
        let text = DOUBLE_INTEGRATOR.replace(r#""R": [[1]],"#, "");
        match load_problem(text.as_bytes()) {
            Err(Error::Parse(msg)) => assert!(msg.contains("`R`"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_shapes_are_rejected() {
        let text = DOUBLE_INTEGRATOR.replace(r#""B": [[0], [1]]"#, r#""B": [[0], [1], [2]]"#);
        assert!(matches!(
            load_problem(text.as_bytes()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn unknown_regime_is_a_parse_error() {
        let text = DOUBLE_INTEGRATOR.replace(r#""fixed""#, r#""loose""#);
        assert!(matches!(
            load_problem(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn free_regime_rejects_final_state() {
        let text = DOUBLE_INTEGRATOR.replace(r#""fixed""#, r#""free""#);
        assert!(matches!(
            load_problem(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let (mut p, b) = load_problem(DOUBLE_INTEGRATOR.as_bytes()).unwrap();
        p.q[(0, 0)] = 0.1 + 0.2;
        p.a[(1, 0)] = -1.0 / 3.0;
        let mut buf = Vec::new();
        save_problem(&p, &b, &mut buf).unwrap();
        let (p2, b2) = load_problem(buf.as_slice()).unwrap();
        assert_eq!(p, p2);
        assert_eq!(b, b2);
    }
}
