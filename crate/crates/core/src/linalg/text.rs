//! Plain-text matrix format: one row per line, comma-separated decimal
//! entries, no header. The writer emits 17 significant digits so every
//! `f64` round-trips exactly.

use std::fmt::Write as _;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits (`d.dddddddddddddddde±x`).
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    format!("{v:.16e}")
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty input".into(),
        });
    }

    let mut cols = 0;
    let mut data = Vec::new();
    for (li, line) in lines.iter().enumerate() {
        let line_no = li + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if li == 0 {
            cols = fields.len();
        } else if fields.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                column: fields.len().min(cols) + 1,
                message: format!("expected {cols} entries, found {}", fields.len()),
            });
        }
        for (ci, field) in fields.iter().enumerate() {
            let tok = field.trim();
            let bad = |message: String| Error::Parse {
                line: line_no,
                column: ci + 1,
                message,
            };
            let v: f64 = tok
                .parse()
                .map_err(|_| bad(format!("cannot parse {tok:?} as a number")))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite entry {tok:?}")));
            }
            data.push(v);
        }
    }
    DenseMatrix::new(lines.len(), cols, data)
}

pub fn write_matrix(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(a.rows() * a.cols() * 25);
    for i in 0..a.rows() {
        for (j, v) in a.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", format_f64(*v));
        }
        out.push('\n');
    }
    out
}
