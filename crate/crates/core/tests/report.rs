mod common;

use lq_turnpike::expansion::SweepOptions;
use lq_turnpike::report::{
    to_json_string, write_summary_json, write_sweep_csv, write_trajectory_csv,
};
use lq_turnpike::{sweep_and_fit, Analysis, GridSpec};

use common::*;

fn text(write: impl FnOnce(&mut Vec<u8>)) -> String {
    let mut buf = Vec::new();
    write(&mut buf);
    String::from_utf8(buf).unwrap()
}

#[test]
fn outputs_are_deterministic() {
    for (name, p, b) in all_examples() {
        let grid = Analysis::new(p.clone(), b.clone())
            .unwrap()
            .t_grid()
            .unwrap();
        let render = || {
            let report = sweep_and_fit(&p, &b, &grid, &SweepOptions::default()).unwrap();
            let csv = text(|w| write_sweep_csv(&report, w).unwrap());
            let json = text(|w| write_summary_json(&report, w).unwrap());
            (csv, json)
        };
        assert_eq!(render(), render(), "{name}");
    }
}

#[test]
fn sweep_csv_round_trips_the_report() {
    let (p, b) = lq_turnpike::model::builtin_example("double_integrator", None).unwrap();
    let report = sweep_and_fit(&p, &b, &[4.0, 8.0, 12.0], &SweepOptions::default()).unwrap();
    let csv = text(|w| write_sweep_csv(&report, w).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("T,V_T,predictor,residual,abs_residual"));
    for (line, point) in lines.zip(&report.sweep) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(
            fields,
            vec![
                point.t,
                point.v_t,
                point.predictor,
                point.residual,
                point.residual.abs()
            ]
        );
    }
}

#[test]
fn empty_sweep_writes_the_header_only() {
    let (p, b) = heat_like();
    let mut report = sweep_and_fit(&p, &b, &[5.0], &SweepOptions::default()).unwrap();
    report.sweep.clear();
    let csv = text(|w| write_sweep_csv(&report, w).unwrap());
    assert_eq!(csv, "T,V_T,predictor,residual,abs_residual\n");
}

#[test]
fn summary_carries_version_and_fit_status() {
    let (p, b) = lq_turnpike::model::builtin_example("scalar", None).unwrap();
    let report = sweep_and_fit(&p, &b, &[6.0, 8.0, 10.0, 12.0], &SweepOptions::default()).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&text(|w| write_summary_json(&report, w).unwrap())).unwrap();
    assert_eq!(json["format_version"], 1);
    assert_eq!(json["fit_status"]["status"], "fitted");
    assert_eq!(json["regime"], "FixedEndpoints");
    assert_eq!(json["sweep"].as_array().unwrap().len(), 4);
    assert_eq!(json["nu_fit"].as_f64(), report.nu_fit);
}

#[test]
fn trajectory_csv_has_one_row_per_sample() {
    let (p, b) = lq_turnpike::model::builtin_example("double_integrator", None).unwrap();
    let sol = Analysis::new(p, b.clone()).unwrap().solve(b.t).unwrap();
    let traj = sol
        .sample(&GridSpec::uniform(11).build(b.t).unwrap())
        .unwrap();
    let csv = text(|w| write_trajectory_csv(&traj, w).unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,y_1,y_2,u_1,lambda_1,lambda_2");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(last[0], b.t);
    assert!((last[1] - b.y1.as_ref().unwrap()[0]).abs() < 1e-10);
}

#[test]
fn json_numbers_use_seventeen_digits() {
    let s = to_json_string(&vec![0.1_f64, 1.0 / 3.0]).unwrap();
    assert!(s.contains("1.0000000000000001e-1"), "{s}");
    let back: Vec<f64> = serde_json::from_str(&s).unwrap();
    assert_eq!(back, vec![0.1, 1.0 / 3.0]);
}
