use std::path::{Path, PathBuf};

use crate::build::World;
use crate::commands::execute;
use crate::error::{CliError, EXIT_FAIL, EXIT_NUMERICAL, EXIT_PASS};
use crate::report::{write_contours, write_provenance, write_text, Abort, GridInfo, Report, Status};
use crate::scenario::{Loaded, COMMANDS};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.report.status {
            Status::Pass => EXIT_PASS,
            Status::Fail => EXIT_FAIL,
            Status::Aborted => EXIT_NUMERICAL,
        }
    }
}

/// Runs a loaded scenario and writes its report (and contours or provenance when requested).
///
/// Schema problems found while building come back as `Err`. A numerical abort still writes a
/// report, with status `aborted`, and is returned as `Ok`.
pub fn run(loaded: &Loaded, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let mut s = loaded.scenario.clone();
    if let Some(n) = opts.grid {
        s.grid.cells = n;
    }
    let seed = opts.seed.unwrap_or(s.seed);
    s.seed = seed;
    s.validate()?;
    let world = World::build(&s);
    let grid_info = match &world {
        Ok(w) => GridInfo::from(&w.grid),
        Err(_) => GridInfo { dim: s.grid.dim, period: s.grid.period, cells: s.grid.cells, spacing: s.grid.period / s.grid.cells as f64 },
    };
    let mut report = Report::new(&s.name, &loaded.sha256, s.command.kind(), grid_info, seed);
    let out_dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Write { path: out_dir.clone(), message: e.to_string() })?;
    let mut files = Vec::new();

    let result = world.and_then(|w| execute(&s, &w, seed));
    match result {
        Ok(outcome) => {
            report.checks = outcome.checks;
            report.results = outcome.results;
            if let Some(name) = &s.outputs.contours {
                let path = out_dir.join(name);
                write_contours(&path, &outcome.contours)?;
                files.push(path);
            }
            if let Some(log) = &outcome.provenance {
                let name = s.outputs.provenance.clone().unwrap_or_else(|| format!("{}.provenance.jsonl", s.name));
                let path = out_dir.join(name);
                write_provenance(&path, log)?;
                files.push(path);
            }
        }
        Err(CliError::Numerical { stage, source }) => {
            report.abort = Some(Abort { stage, error: source.to_string() });
        }
        Err(e) => return Err(e),
    }
    report.finish();
    let path = out_dir.join(s.outputs.report.clone().unwrap_or_else(|| format!("{}.json", s.name)));
    write_text(&path, &report.to_json())?;
    files.insert(0, path);
    Ok(RunOutcome { report, files })
}

pub fn run_path(path: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    run(&Loaded::from_path(path)?, opts)
}

/// Names accepted in scenario files, for `list-builtins`.
pub fn builtins() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("spacetimes", vec!["minkowski", "ultrastatic", "expression", "distal"]),
        ("maps", vec!["identity", "scaling", "radial"]),
        ("regions", vec!["ball", "box", "annulus", "union"]),
        ("commands", COMMANDS.to_vec()),
        ("chain-modes", vec!["split", "rs", "both", "weak-distal"]),
        ("splitcalc-rules", vec!["dilation", "scaling", "bisection", "refine", "drive", "easydistal"]),
        ("expression-functions", causalkit::expr::FUNCTIONS.to_vec()),
        ("expression-constants", causalkit::expr::CONSTANTS.to_vec()),
        ("expression-variables", vec!["t", "x1", "x2"]),
    ]
}
