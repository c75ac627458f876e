//! Minimal numeric CSV used by every artifact the crate writes.
//!
//! Numbers are written in scientific notation with 17 significant digits
//! (`{:.16e}`), which round-trips any `f64` exactly. Lines end in `\n`.

use ndarray::Array2;

use crate::{Error, Result};

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut out = String::with_capacity(m.len() * 24);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_f64(field: &str) -> Result<f64> {
    let field = field.trim();
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{field}` is not a number")))
}

/// Parses a headerless rectangular numeric table.
pub fn parse_matrix(text: &str) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for field in line.split(',') {
            data.push(parse_f64(field)?);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse(format!(
                    "line {}: expected {c} fields, found {width}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::Parse("empty table".into()))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::Parse(e.to_string()))
}
