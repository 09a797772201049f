//! JSON reports, CSV contours and JSON-lines provenance.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use causalkit::distal::Provenance;
use causalkit::{Grid, Point, CFL};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const TOOL: &str = "causalkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Aborted,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass, value: None, limit: None, detail: None }
    }

    /// Passes when `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit).value(value).limit(limit)
    }

    /// Passes when `value ≥ limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value >= limit).value(value).limit(limit)
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn limit(mut self, v: f64) -> Self {
        self.limit = Some(v);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dim: usize,
    pub period: f64,
    pub cells: usize,
    pub spacing: f64,
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        Self { dim: g.dim(), period: g.period(), cells: g.cells(), spacing: g.spacing() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Abort {
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub scenario_sha256: String,
    pub command: &'static str,
    pub grid: GridInfo,
    pub cfl: f64,
    pub seed: u64,
    pub status: Status,
    pub checks: Vec<Check>,
    pub results: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort: Option<Abort>,
}

impl Report {
    pub fn new(scenario: &str, sha256: &str, command: &'static str, grid: GridInfo, seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            scenario: scenario.to_string(),
            scenario_sha256: sha256.to_string(),
            command,
            grid,
            cfl: CFL,
            seed,
            status: Status::Pass,
            checks: Vec::new(),
            results: Value::Null,
            abort: None,
        }
    }

    pub fn finish(&mut self) {
        self.status = if self.abort.is_some() {
            Status::Aborted
        } else if self.checks.iter().all(|c| c.pass) {
            Status::Pass
        } else {
            Status::Fail
        };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn write_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Write { path: path.to_path_buf(), message: e.to_string() }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| write_err(path, e))
}

#[derive(Serialize)]
struct ContourRow {
    slice_t: f64,
    poly_id: usize,
    x: f64,
    y: f64,
}

/// Contour polylines labelled by slice time; `poly_id` counts polylines across the whole file.
pub type SliceContours = Vec<(f64, Vec<Vec<Point>>)>;

pub fn write_contours(path: &Path, slices: &SliceContours) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| write_err(path, e))?;
    let mut id = 0;
    let mut wrote = false;
    for (t, polys) in slices {
        for poly in polys {
            for p in poly {
                w.serialize(ContourRow { slice_t: *t, poly_id: id, x: p[0], y: p[1] }).map_err(|e| write_err(path, e))?;
                wrote = true;
            }
            id += 1;
        }
    }
    if !wrote {
        w.write_record(["slice_t", "poly_id", "x", "y"]).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}

pub fn write_provenance(path: &Path, log: &[Provenance]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| write_err(path, e))?;
    let mut w = BufWriter::new(file);
    for entry in log {
        let line = serde_json::to_string(entry).map_err(|e| write_err(path, e))?;
        writeln!(w, "{line}").map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| write_err(path, e))
}
