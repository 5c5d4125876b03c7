//! Delimited-text input and the trace, path and summary output files.

use std::fs;
use std::io::Write;
use std::path::Path;

use proxkit_core::linalg::DenseMatrix;
use proxkit_core::solvers::{SolverTrace, TraceRecord};

use crate::error::{Error, Result};
use crate::experiments::{PathCell, RegularizationPath};

/// A design matrix with its response and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub a: DenseMatrix,
    pub y: Vec<f64>,
    pub names: Vec<String>,
    pub response: String,
}

/// Reads a delimited file (comma, or runs of whitespace) with a header row.
///
/// The response is the column named `response`, or the first column. When
/// `columns` is given only those predictors are parsed, in that order; other
/// columns may hold non-numeric data. A leading unnamed row-label field
/// (every data row one field longer than the header) is skipped. Cell
/// positions in errors are 1-based, counting data rows after the header.
pub fn ingest_csv(path: &Path, response: Option<&str>, columns: Option<&[&str]>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = split_rows(path, &text)?;
    let Some((header, body)) = rows.split_first() else {
        return Err(Error::data(path, "no rows"));
    };
    if body.is_empty() {
        return Err(Error::data(path, "no rows"));
    }
    let width = header.len();
    let labelled = body.iter().all(|r| r.len() == width + 1);
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(path, format!("no column named `{name}`")))
    };
    let response_idx = match response {
        Some(name) => find(name)?,
        None => 0,
    };
    let predictor_idx: Vec<usize> = match columns {
        Some(cols) => cols.iter().map(|c| find(c)).collect::<Result<_>>()?,
        None => (0..width).filter(|&j| j != response_idx).collect(),
    };
    if predictor_idx.is_empty() {
        return Err(Error::data(path, "no predictor columns"));
    }
    let d = predictor_idx.len();
    let mut data = Vec::with_capacity(body.len() * d);
    let mut y = Vec::with_capacity(body.len());
    for (r, row) in body.iter().enumerate() {
        let fields: &[String] = if labelled { &row[1..] } else { row };
        if fields.len() != width {
            return Err(Error::data(
                path,
                format!("row {} has {} fields, expected {width}", r + 1, fields.len()),
            ));
        }
        let cell = |j: usize| -> Result<f64> {
            let raw = fields[j].trim();
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Cell {
                    path: path.to_path_buf(),
                    row: r + 1,
                    column: j + 1,
                    message: format!("`{raw}` is not a finite number"),
                }),
            }
        };
        y.push(cell(response_idx)?);
        for &j in &predictor_idx {
            data.push(cell(j)?);
        }
    }
    let n = y.len();
    Ok(Dataset {
        a: DenseMatrix::new(n, d, data)?,
        y,
        names: predictor_idx.iter().map(|&j| header[j].clone()).collect(),
        response: header[response_idx].clone(),
    })
}

fn split_rows(path: &Path, text: &str) -> Result<Vec<Vec<String>>> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(',') {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::data(path, e.to_string()))?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            rows.push(rec.iter().map(|f| f.trim_matches('"').to_string()).collect());
        }
        Ok(rows)
    } else {
        Ok(text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(|f| f.trim_matches('"').to_string()).collect())
            .collect())
    }
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Renders the trace file: header `iter,objective,residual,step,seconds`,
/// one row per iteration. Floats use the shortest round-trip form.
pub fn trace_csv(trace: &SolverTrace) -> String {
    let mut out = String::from("iter,objective,residual,step,seconds\n");
    for (i, r) in trace.records.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            r.objective,
            r.residual,
            r.step,
            r.seconds
        ));
    }
    out
}

pub fn write_trace(path: &Path, trace: &SolverTrace) -> Result<()> {
    write_all(path, trace_csv(trace).as_bytes())
}

fn parse_field(path: &Path, row: usize, column: usize, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::Cell {
        path: path.to_path_buf(),
        row,
        column,
        message: format!("`{raw}` is not a number"),
    })
}

/// Parses a trace file written by [`write_trace`].
pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("iter,objective,residual,step,seconds") {
        return Err(Error::data(path, "unexpected trace header"));
    }
    let mut records = Vec::new();
    for (r, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::data(path, format!("row {} has {} fields, expected 5", r + 1, f.len())));
        }
        records.push(TraceRecord {
            objective: parse_field(path, r + 1, 2, f[1])?,
            residual: parse_field(path, r + 1, 3, f[2])?,
            step: parse_field(path, r + 1, 4, f[3])?,
            seconds: parse_field(path, r + 1, 5, f[4])?,
        });
    }
    Ok(records)
}

/// Renders the path file: header `lambda,q,index,value,support,mse`, one row
/// per grid cell and coefficient (0-based coefficient index).
pub fn path_csv(path: &RegularizationPath) -> String {
    let mut out = String::from("lambda,q,index,value,support,mse\n");
    for c in &path.cells {
        for (j, v) in c.x.iter().enumerate() {
            out.push_str(&format!("{},{},{},{},{},{}\n", c.lambda, c.q, j, v, c.support, c.mse));
        }
    }
    out
}

pub fn write_path(file: &Path, path: &RegularizationPath) -> Result<()> {
    write_all(file, path_csv(path).as_bytes())
}

/// Parses a path file into cells (grid order preserved; coefficient labels
/// and per-cell diagnostics are not stored in the file).
pub fn read_path(file: &Path) -> Result<Vec<PathCell>> {
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let mut lines = text.lines();
    if lines.next() != Some("lambda,q,index,value,support,mse") {
        return Err(Error::data(file, "unexpected path header"));
    }
    let mut cells: Vec<PathCell> = Vec::new();
    for (r, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::data(file, format!("row {} has {} fields, expected 6", r + 1, f.len())));
        }
        let lambda = parse_field(file, r + 1, 1, f[0])?;
        let q = parse_field(file, r + 1, 2, f[1])?;
        let index = parse_field(file, r + 1, 3, f[2])? as usize;
        let value = parse_field(file, r + 1, 4, f[3])?;
        let support = parse_field(file, r + 1, 5, f[4])? as usize;
        let mse = parse_field(file, r + 1, 6, f[5])?;
        if index == 0 {
            cells.push(PathCell {
                lambda,
                q,
                x: Vec::new(),
                support,
                mse,
                objective: f64::NAN,
                error: None,
            });
        }
        match cells.last_mut() {
            Some(c) if c.x.len() == index => c.x.push(value),
            _ => return Err(Error::data(file, format!("row {}: coefficient index out of order", r + 1))),
        }
    }
    Ok(cells)
}

/// Writes pretty-printed JSON followed by a newline.
pub fn write_summary(path: &Path, summary: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    write_all(path, text.as_bytes())
}
