//! Reading and writing measures as JSON or CSV files.
//!
//! JSON schema: `{"dim": d, "points": [[x11, ..., x1d], ...], "weights": [w1, ...]}`
//! with `weights` optional (uniform when absent). CSV rows carry one point
//! each; an optional header names the columns, and when its last column is
//! `weight` that column carries the atom weights.

use std::path::Path;

use crate::measures::DiscreteMeasure;
use crate::{Error, Result};

/// Validates raw parts (nested points, optional weights) into a measure.
pub fn measure_from_parts(
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
) -> Result<DiscreteMeasure> {
    let n = points.len();
    let mut flat = Vec::with_capacity(n * dim);
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::InvalidInput(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
        flat.extend_from_slice(p);
    }
    match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::InvalidInput(format!(
                    "{} weights for {} points",
                    w.len(),
                    n
                )));
            }
            DiscreteMeasure::new(dim, flat, w)
        }
        None => DiscreteMeasure::from_samples(dim, flat),
    }
}

/// Parses the JSON measure format.
pub fn measure_from_json(text: &str) -> Result<DiscreteMeasure> {
    serde_json::from_str(text).map_err(|e| Error::Io(format!("measure json: {e}")))
}

/// Serializes a measure to the JSON format (single line, stable field order).
pub fn measure_to_json(m: &DiscreteMeasure) -> String {
    serde_json::to_string(m).expect("measure serialization cannot fail")
}

/// Parses the CSV measure format.
///
/// Rows are comma-separated numbers, one point per row. A first row that
/// fails to parse as numbers is treated as a header; the weights column is
/// recognized by a trailing header field named `weight` (or `w`). Without a
/// header every column is a coordinate and weights are uniform.
pub fn measure_from_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let first = *rows
        .peek()
        .ok_or_else(|| Error::Io("csv measure: no data rows".into()))?;
    let parse_row = |line: &str| -> Option<Vec<f64>> {
        line.split(',')
            .map(|f| f.trim().parse::<f64>().ok())
            .collect::<Option<Vec<f64>>>()
    };
    let mut has_weight_col = false;
    if parse_row(first).is_none() {
        let fields: Vec<String> =
            first.split(',').map(|f| f.trim().to_ascii_lowercase()).collect();
        has_weight_col = matches!(fields.last().map(String::as_str), Some("weight" | "w"));
        rows.next();
    }
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut width = None;
    for (i, line) in rows.enumerate() {
        let mut vals = parse_row(line)
            .ok_or_else(|| Error::Io(format!("csv measure: bad number in data row {i}")))?;
        if *width.get_or_insert(vals.len()) != vals.len() {
            return Err(Error::Io(format!("csv measure: ragged row {i}")));
        }
        if has_weight_col {
            if vals.len() < 2 {
                return Err(Error::Io("csv measure: weight column needs coordinates".into()));
            }
            weights.push(vals.pop().unwrap());
        }
        points.push(vals);
    }
    let dim = points.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(Error::Io("csv measure: no coordinate columns".into()));
    }
    measure_from_parts(dim, points, has_weight_col.then_some(weights))
}

/// Serializes a measure as CSV with a header row including the weight column.
pub fn measure_to_csv(m: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for k in 0..m.dim() {
        out.push_str(&format!("x{k},"));
    }
    out.push_str("weight\n");
    for i in 0..m.len() {
        for c in m.point(i) {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{}\n", m.weight(i)));
    }
    out
}

/// Loads a measure from a path, dispatching on the file extension and
/// falling back to content sniffing (`{` opens JSON) when it is unfamiliar.
pub fn load_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => measure_from_json(&text),
        Some("csv") => measure_from_csv(&text),
        _ => {
            if text.trim_start().starts_with('{') {
                measure_from_json(&text)
            } else {
                measure_from_csv(&text)
            }
        }
    }
}

/// Writes a measure to a path in the format implied by its extension
/// (defaults to JSON).
pub fn save_measure(m: &DiscreteMeasure, path: &Path) -> Result<()> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => measure_to_csv(m),
        _ => measure_to_json(m),
    };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
