//! Cell-by-cell comparison of two runs of the same figure.

use std::fs;
use std::path::Path;

use crate::error::{Category, CliError};
use crate::run::{read_manifest, sha256_hex, Manifest};
use crate::table::{format_number, parse_csv, RawCsv};

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiff {
    pub file: String,
    pub row: usize,
    pub column: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub abs_diff: f64,
    /// Combined standard error of the two cells (0 for exact values).
    pub sigma: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FileSummary {
    pub file: String,
    pub cells: usize,
    pub failing: usize,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareReport {
    pub files: Vec<FileSummary>,
    pub cells: Vec<CellDiff>,
}

impl CompareReport {
    pub fn max_abs_diff(&self) -> f64 {
        self.files.iter().map(|f| f.max_abs_diff).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> usize {
        self.files.iter().map(|f| f.failing).sum()
    }

    pub fn summary(&self) -> String {
        let mut out = String::from("file,cells,failing,max_abs_diff\n");
        for f in &self.files {
            out.push_str(&format!(
                "{},{},{},{}\n",
                f.file,
                f.cells,
                f.failing,
                format_number(f.max_abs_diff)
            ));
        }
        out
    }

    /// Every compared cell as CSV.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("file,row,column,a,b,abs_diff,sigma,ok\n");
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.file,
                c.row,
                c.column,
                opt(c.a),
                opt(c.b),
                format_number(c.abs_diff),
                format_number(c.sigma),
                c.ok
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Allowed deviation in combined standard errors.
    pub sigmas: f64,
    /// Absolute slack added to every cell.
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            sigmas: 3.0,
            absolute: 0.0,
        }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::new(Category::Schema, msg)
}

fn load_csv(dir: &Path, m: &Manifest, name: &str) -> Result<RawCsv, CliError> {
    let entry = m
        .files
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| schema(format!("{name} is missing from one manifest")))?;
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| CliError::io(path.display(), e))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(schema(format!("{} does not match its manifest digest", path.display())));
    }
    let text = String::from_utf8(bytes).map_err(|_| schema(format!("{}: not UTF-8", path.display())))?;
    parse_csv(&text).ok_or_else(|| schema(format!("{}: ragged CSV", path.display())))
}

fn number(raw: &str) -> Result<Option<f64>, ()> {
    if raw.is_empty() {
        Ok(None)
    } else {
        raw.parse().map(Some).map_err(|_| ())
    }
}

fn compare_tables(file: &str, a: &RawCsv, b: &RawCsv, tol: Tolerance, report: &mut CompareReport) -> Result<(), CliError> {
    if a.header != b.header {
        return Err(schema(format!("{file}: column headers differ")));
    }
    if a.rows.len() != b.rows.len() {
        return Err(schema(format!("{file}: {} rows vs {}", a.rows.len(), b.rows.len())));
    }
    let mut summary = FileSummary {
        file: file.to_string(),
        ..FileSummary::default()
    };
    let stderr_of = |col: &str| a.header.iter().position(|h| *h == format!("{col}_stderr"));

    for (r, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        for (c, name) in a.header.iter().enumerate() {
            if name.ends_with("_stderr") {
                continue;
            }
            let (va, vb) = match (number(&ra[c]), number(&rb[c])) {
                (Ok(x), Ok(y)) => (x, y),
                _ => {
                    // text column: must agree exactly
                    if ra[c] != rb[c] {
                        return Err(schema(format!("{file} row {r}: `{name}` is `{}` vs `{}`", ra[c], rb[c])));
                    }
                    continue;
                }
            };
            let sigma = stderr_of(name)
                .map(|s| {
                    let ea = number(&ra[s]).ok().flatten().unwrap_or(0.0);
                    let eb = number(&rb[s]).ok().flatten().unwrap_or(0.0);
                    (ea * ea + eb * eb).sqrt()
                })
                .unwrap_or(0.0);
            let (abs_diff, ok) = match (va, vb) {
                (Some(x), Some(y)) if x == y => (0.0, true),
                (Some(x), Some(y)) => {
                    let d = (x - y).abs();
                    (d, d <= tol.sigmas * sigma + tol.absolute)
                }
                (None, None) => (0.0, true),
                _ => (f64::INFINITY, false),
            };
            summary.cells += 1;
            summary.failing += (!ok) as usize;
            summary.max_abs_diff = summary.max_abs_diff.max(abs_diff);
            report.cells.push(CellDiff {
                file: file.to_string(),
                row: r,
                column: name.clone(),
                a: va,
                b: vb,
                abs_diff,
                sigma,
                ok,
            });
        }
    }
    report.files.push(summary);
    Ok(())
}

/// Compare every CSV listed in both manifests. Files are resolved next to each manifest.
pub fn compare(a: &Path, b: &Path, tol: Tolerance) -> Result<CompareReport, CliError> {
    let (ma, mb) = (read_manifest(a)?, read_manifest(b)?);
    if ma.figure != mb.figure {
        return Err(schema(format!("figures differ: {} vs {}", ma.figure, mb.figure)));
    }
    let dir = |p: &Path| p.parent().map(Path::to_path_buf).unwrap_or_default();
    let (da, db) = (dir(a), dir(b));
    let names_a: Vec<&str> = ma.files.iter().map(|f| f.name.as_str()).filter(|n| n.ends_with(".csv")).collect();
    let names_b: Vec<&str> = mb.files.iter().map(|f| f.name.as_str()).filter(|n| n.ends_with(".csv")).collect();
    if names_a != names_b {
        return Err(schema("the runs list different CSV files"));
    }
    let mut report = CompareReport::default();
    for name in names_a {
        let ta = load_csv(&da, &ma, name)?;
        let tb = load_csv(&db, &mb, name)?;
        compare_tables(name, &ta, &tb, tol, &mut report)?;
    }
    Ok(report)
}
