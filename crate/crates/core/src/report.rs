//! JSON and CSV serialization of reports and sweep tables.
//!
//! Reports become a flat JSON object in field order. CSV output follows
//! RFC 4180 with `\r\n` line endings. Floats are printed in Rust's shortest
//! round-trip form, so equal inputs give byte-identical files.

use std::io::Write;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::pinch::{PinchReport, VertexFields};

fn json_err(e: serde_json::Error) -> Error {
    Error::Numerical(format!("serialization failed: {e}"))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numerical(format!("csv output failed: {other:?}")),
    }
}

/// Pretty JSON with a trailing newline.
pub fn report_json(report: &PinchReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(json_err)?;
    s.push('\n');
    Ok(s)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(";"),
        Value::Object(_) => v.to_string(),
    }
}

/// Scalar columns of a report. `center` expands to `center_0..center_3` and
/// `flags` joins with `;`.
pub fn report_columns(report: &PinchReport) -> Result<Vec<(String, String)>> {
    let Value::Object(map) = serde_json::to_value(report).map_err(json_err)? else {
        unreachable!("reports serialize to objects")
    };
    let mut out = Vec::with_capacity(map.len() + 3);
    for (k, v) in map {
        match (&*k, &v) {
            ("center", Value::Array(a)) => {
                for (i, x) in a.iter().enumerate() {
                    out.push((format!("center_{i}"), cell(x)));
                }
            }
            _ => out.push((k, cell(&v))),
        }
    }
    Ok(out)
}

/// One row per report, prefixed by label columns.
pub fn write_reports_csv<W: Write>(w: W, labels: &[&str], rows: &[(Vec<String>, PinchReport)]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
    let mut header_done = false;
    for (lab, report) in rows {
        if lab.len() != labels.len() {
            return Err(Error::domain("label count does not match the header"));
        }
        let cols = report_columns(report)?;
        if !header_done {
            let head: Vec<&str> = labels.iter().copied().chain(cols.iter().map(|c| c.0.as_str())).collect();
            wr.write_record(&head).map_err(csv_err)?;
            header_done = true;
        }
        let rec: Vec<&str> = lab.iter().map(String::as_str).chain(cols.iter().map(|c| c.1.as_str())).collect();
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Equal-length numeric columns under a header.
pub fn write_columns_csv<W: Write>(w: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    if header.len() != columns.len() {
        return Err(Error::domain("header and column counts differ"));
    }
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::domain("columns have different lengths"));
    }
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
    wr.write_record(header).map_err(csv_err)?;
    for i in 0..n {
        wr.write_record(columns.iter().map(|c| c[i].to_string())).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Per-vertex `H, |B|, |X|, ψ, Δr`.
pub fn write_vertex_fields_csv<W: Write>(w: W, f: &VertexFields) -> Result<()> {
    let idx: Vec<f64> = (0..f.h.len()).map(|i| i as f64).collect();
    write_columns_csv(
        w,
        &["vertex", "H", "B_norm", "X_norm", "psi", "delta_r"],
        &[&idx, &f.h, &f.b_norm, &f.x_norm, &f.psi, &f.delta_r],
    )
}
