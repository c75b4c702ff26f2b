//! File formats.
//!
//! * Panels are wide CSV: a header row whose first cell is ignored and whose
//!   remaining cells are time labels, then one row per object with its label
//!   in the first column. Time labels that are not all numeric become `1..=m`.
//! * Tensors are long CSV with columns `t,i,j,d`, objects numbered from 1.
//!   Lines starting with `#` are comments.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a written file gives back the same bits.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fmds_core::{DissimilarityMatrix, DissimilarityTensor, ObjectPanel};

use crate::error::{CliError, Result};

/// Conflicting entries for the same pair must agree to this tolerance.
pub const DUPLICATE_TOL: f64 = 1e-10;

pub fn read_panel(path: &Path) -> Result<ObjectPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(CliError::ingest(path, "file is empty")),
    };
    let time_labels: Vec<&str> = header.iter().skip(1).collect();
    let m = time_labels.len();
    if m == 0 {
        return Err(CliError::ingest(path, "header has no time columns"));
    }
    let time_grid = parse_time_labels(path, &time_labels)?;

    let mut labels = Vec::new();
    let mut series = Vec::new();
    let mut seen = HashSet::new();
    for (idx, record) in records.enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        let label = record.get(0).unwrap_or("").to_string();
        if label.is_empty() {
            return Err(CliError::IngestCell { path: path.into(), row, col: 0, msg: "missing object label".into() });
        }
        if !seen.insert(label.clone()) {
            return Err(CliError::ingest(path, format!("duplicate object label `{label}` on row {row}")));
        }
        let mut values = Vec::with_capacity(m);
        for col in 1..=m {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                return Err(CliError::IngestCell { path: path.into(), row, col, msg: "missing value".into() });
            }
            let v: f64 = cell.parse().map_err(|_| CliError::IngestCell {
                path: path.into(),
                row,
                col,
                msg: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(CliError::IngestCell { path: path.into(), row, col, msg: "value is not finite".into() });
            }
            values.push(v);
        }
        if record.len() > m + 1 {
            return Err(CliError::IngestCell {
                path: path.into(),
                row,
                col: m + 1,
                msg: format!("row has {} values, header has {m} time points", record.len() - 1),
            });
        }
        labels.push(label);
        series.push(values);
    }
    if labels.is_empty() {
        return Err(CliError::ingest(path, "no object rows"));
    }
    Ok(ObjectPanel::scalar(labels, time_grid, series)?)
}

fn parse_time_labels(path: &Path, labels: &[&str]) -> Result<Vec<f64>> {
    let parsed: Option<Vec<f64>> = labels.iter().map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
    match parsed {
        Some(grid) => {
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::ingest(path, "numeric time labels must be strictly increasing"));
            }
            Ok(grid)
        }
        None => Ok((1..=labels.len()).map(|k| k as f64).collect()),
    }
}

pub fn read_tensor(path: &Path) -> Result<DissimilarityTensor> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut rows: Vec<(f64, usize, usize, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if idx == 0 && record.get(0).is_some_and(|c| c.eq_ignore_ascii_case("t")) {
            continue;
        }
        if record.len() != 4 {
            return Err(CliError::ingest(path, format!("line {line}: expected 4 columns t,i,j,d")));
        }
        let bad = |what: &str| CliError::ingest(path, format!("line {line}: invalid {what}"));
        let t: f64 = record[0].parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| bad("t"))?;
        let i: usize = record[1].parse().ok().filter(|v| *v >= 1).ok_or_else(|| bad("object index i"))?;
        let j: usize = record[2].parse().ok().filter(|v| *v >= 1).ok_or_else(|| bad("object index j"))?;
        let d: f64 = record[3].parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| bad("d"))?;
        if i == j {
            return Err(CliError::ingest(path, format!("line {line}: diagonal entry ({i},{j})")));
        }
        if d < 0.0 {
            return Err(CliError::ingest(path, format!("line {line}: negative dissimilarity {d}")));
        }
        rows.push((t, i.min(j), i.max(j), d));
    }
    if rows.is_empty() {
        return Err(CliError::ingest(path, "no data rows"));
    }

    let n = rows.iter().map(|r| r.2).max().unwrap_or(0);
    let mut grid: Vec<f64> = rows.iter().map(|r| r.0).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut slots: Vec<Vec<Option<f64>>> = vec![vec![None; n * n]; grid.len()];
    for &(t, i, j, d) in &rows {
        let k = grid.binary_search_by(|g| g.total_cmp(&t)).expect("t is in the grid");
        let slot = &mut slots[k][(i - 1) * n + (j - 1)];
        match slot {
            Some(prev) if (*prev - d).abs() > DUPLICATE_TOL => {
                return Err(CliError::ingest(
                    path,
                    format!("conflicting values {prev} and {d} for pair ({i},{j}) at t = {t}"),
                ));
            }
            Some(_) => {}
            None => *slot = Some(d),
        }
    }

    let mut slices = Vec::with_capacity(grid.len());
    for (k, filled) in slots.iter().enumerate() {
        for i in 0..n {
            for j in i + 1..n {
                if filled[i * n + j].is_none() {
                    return Err(CliError::ingest(
                        path,
                        format!("missing pair ({},{}) at t = {}", i + 1, j + 1, grid[k]),
                    ));
                }
            }
        }
        slices.push(DissimilarityMatrix::from_upper(n, |i, j| filled[i * n + j].unwrap_or(0.0))?);
    }
    Ok(DissimilarityTensor::new(grid, slices)?)
}

/// Long CSV text for `tensor`, optionally headed by a manifest hash comment.
pub fn tensor_csv(tensor: &DissimilarityTensor, manifest_hash: Option<&str>) -> String {
    let mut out = header_comment(manifest_hash);
    out.push_str("t,i,j,d\n");
    for (k, &t) in tensor.time_grid().iter().enumerate() {
        let slice = tensor.slice(k);
        for i in 0..tensor.n() {
            for j in i + 1..tensor.n() {
                let _ = writeln!(out, "{t},{},{},{}", i + 1, j + 1, slice.get(i, j));
            }
        }
    }
    out
}

pub fn write_tensor(path: &Path, tensor: &DissimilarityTensor, manifest_hash: Option<&str>) -> Result<()> {
    write_file(path, tensor_csv(tensor, manifest_hash))
}

/// Wide CSV text for a scalar panel.
pub fn panel_csv(panel: &ObjectPanel) -> String {
    let mut out = String::from("object");
    for t in panel.time_grid() {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (i, label) in panel.labels().iter().enumerate() {
        out.push_str(label);
        for v in panel.series(i) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn header_comment(manifest_hash: Option<&str>) -> String {
    manifest_hash.map(|h| format!("# manifest_sha256={h}\n")).unwrap_or_default()
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        },
        _ => CliError::ingest(path, e.to_string()),
    }
}
