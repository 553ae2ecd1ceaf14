//! CSV/JSON rendering and the written report files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Nine significant digits; exponent form outside `[1e-4, 1e9)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        format!("{:.*}", (8 - mag).max(0) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

/// A CSV cell: floats get [`fmt_sig`], everything else `Display`.
pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_sig(*x),
            Cell::U(u) => u.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// A named pass/fail check an experiment evaluated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub csv: Option<String>,
    pub json: Option<serde_json::Value>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn stamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Writes `<dir>/<name>.csv` and/or `<dir>/<name>.json`. With `timestamp`
/// the first line of each file records the generation time: a `#` comment
/// for CSV, a `"generated"` key for JSON.
pub fn write_report(report: &Report, dir: &Path, name: &str, timestamp: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if let Some(csv) = &report.csv {
        let path = dir.join(format!("{name}.csv"));
        let body = if timestamp {
            format!("# generated {}\r\n{csv}", stamp())
        } else {
            csv.clone()
        };
        std::fs::write(&path, body)?;
        written.push(path);
    }
    if let Some(json) = &report.json {
        let path = dir.join(format!("{name}.json"));
        let mut body = serde_json::to_string_pretty(json)?;
        if timestamp {
            body = body.replacen('{', &format!("{{\n  \"generated\": \"{}\",", stamp()), 1);
        }
        body.push('\n');
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
