use std::fs;
use std::io::{self, Write};
use std::path::Path;

use flowdet::flow::SweepRow;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Format;

/// One checked quantity: a model value against its oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    /// Position in the experiment's declared order.
    pub row: usize,
    /// `key=value` pairs separated by `;`.
    pub parameters: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub runtime_ms: f64,
}

pub const FIELDS: [&str; 12] = [
    "experiment",
    "row",
    "parameters",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "abs_error",
    "rel_error",
    "tolerance",
    "pass",
    "runtime_ms",
];

impl ReportRow {
    /// Row comparing `lhs` with `rhs`; the error is relative to
    /// `max(|rhs|, 1)`.
    pub fn compare(experiment: &str, parameters: String, lhs: Complex64, rhs: Complex64, tolerance: f64) -> Self {
        let abs_error = (lhs - rhs).norm();
        let rel_error = abs_error / rhs.norm().max(1.0);
        Self::with_error(experiment, parameters, lhs, rhs, abs_error, rel_error, tolerance)
    }

    /// Row with an error measure chosen by the caller.
    pub fn with_error(
        experiment: &str,
        parameters: String,
        lhs: Complex64,
        rhs: Complex64,
        abs_error: f64,
        rel_error: f64,
        tolerance: f64,
    ) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            row: 0,
            parameters,
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_error,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
            runtime_ms: 0.0,
        }
    }

    fn cells(&self) -> [String; 12] {
        [
            self.experiment.clone(),
            self.row.to_string(),
            self.parameters.clone(),
            float(self.lhs_re),
            float(self.lhs_im),
            float(self.rhs_re),
            float(self.rhs_im),
            float(self.abs_error),
            float(self.rel_error),
            float(self.tolerance),
            self.pass.to_string(),
            float(self.runtime_ms),
        ]
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no infinities; both formats share this spelling
        format!("\"{x}\"")
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Vec<u8> {
    let mut w = csv_writer(Vec::new());
    w.write_record(FIELDS).expect("in-memory write");
    for r in rows {
        w.write_record(r.cells()).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn rows_to_json(rows: &[ReportRow]) -> Vec<u8> {
    let mut out = String::from("[");
    for (i, r) in rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
        for (j, (name, cell)) in FIELDS.iter().zip(r.cells()).enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let value = match *name {
                "experiment" | "parameters" => serde_json::to_string(&cell).expect("string serializes"),
                _ => cell,
            };
            out.push_str(&format!("\"{name}\": {value}"));
        }
        out.push('}');
    }
    out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
    out.into_bytes()
}

fn write_bytes(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let wrap = |e: io::Error| io::Error::new(e.kind(), format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::write(path, bytes).map_err(wrap)
}

/// Writes rows as CSV (header line always present) or as a JSON array.
pub fn write_report(rows: &[ReportRow], format: Format, path: &Path) -> io::Result<()> {
    let bytes = match format {
        Format::Csv => rows_to_csv(rows),
        Format::Json => rows_to_json(rows),
    };
    write_bytes(path, &bytes)
}

pub const SWEEP_FIELDS: [&str; 8] = [
    "theta",
    "p",
    "q",
    "N",
    "basepoint",
    "error_trace",
    "error_det",
    "aliasing_flag",
];

/// Per-approximant sweep table; the basepoint is written as `y1 y2`.
pub fn write_sweep(rows: &[SweepRow], path: &Path) -> io::Result<()> {
    let mut w = csv_writer(Vec::new());
    w.write_record(SWEEP_FIELDS).expect("in-memory write");
    for r in rows {
        w.write_record([
            float(r.theta),
            r.p.to_string(),
            r.q.to_string(),
            r.n.to_string(),
            format!("{} {}", float(r.basepoint[0]), float(r.basepoint[1])),
            float(r.error_trace),
            float(r.error_det),
            r.aliasing_flag.to_string(),
        ])
        .expect("in-memory write");
    }
    write_bytes(path, &w.into_inner().expect("in-memory flush"))
}

/// Writes any serializable artifact as pretty JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}
