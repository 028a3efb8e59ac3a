//! JSON and CSV output with 17-significant-digit numbers.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::expansion::ExpansionReport;
use crate::finite_horizon::Trajectory;

pub const FORMAT_VERSION: u32 = 1;

/// `{:.16e}`, i.e. 17 significant digits, which round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON formatter that prints floats in scientific notation with 17
/// significant digits.
struct SciFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, mut sink: impl Write) -> Result<()> {
    sink.write_all(to_json_string(value)?.as_bytes())?;
    sink.write_all(b"\n")?;
    Ok(())
}

/// `t,y_1..y_n,u_1..u_m,lambda_1..lambda_n`, one row per sample.
pub fn write_trajectory_csv(traj: &Trajectory, mut sink: impl Write) -> Result<()> {
    let n = traj.y.first().map_or(0, |v| v.len());
    let m = traj.u.first().map_or(0, |v| v.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("y_{i}")));
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    writeln!(sink, "{}", header.join(","))?;
    for k in 0..traj.grid.len() {
        let mut row = vec![fmt_f64(traj.grid[k])];
        row.extend(traj.y[k].iter().map(|x| fmt_f64(*x)));
        row.extend(traj.u[k].iter().map(|x| fmt_f64(*x)));
        row.extend(traj.lambda[k].iter().map(|x| fmt_f64(*x)));
        writeln!(sink, "{}", row.join(","))?;
    }
    Ok(())
}

/// `T,V_T,predictor,residual,abs_residual`, sorted by `T`.
pub fn write_sweep_csv(report: &ExpansionReport, mut sink: impl Write) -> Result<()> {
    writeln!(sink, "T,V_T,predictor,residual,abs_residual")?;
    for p in &report.sweep {
        writeln!(
            sink,
            "{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.v_t),
            fmt_f64(p.predictor),
            fmt_f64(p.residual),
            fmt_f64(p.residual.abs())
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a> {
    format_version: u32,
    #[serde(flatten)]
    report: &'a ExpansionReport,
}

/// Summary JSON with every report field plus a format version.
pub fn write_summary_json(report: &ExpansionReport, sink: impl Write) -> Result<()> {
    write_json(
        &Summary {
            format_version: FORMAT_VERSION,
            report,
        },
        sink,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1 + 0.2, -1.0 / 3.0, 1e-300, 6.02e23, 0.0, -0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_uses_scientific_floats() {
        let text = to_json_string(&serde_json::json!({"a": [1.5, 2.0], "b": "x"})).unwrap();
        assert!(text.contains("1.5000000000000000e0"), "{text}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"][1], 2.0);
    }

    #[test]
    fn non_finite_floats_become_null() {
        let text = to_json_string(&vec![f64::NAN]).unwrap();
        assert!(text.contains("null"));
    }
}
