use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use causalkit_cli::{builtins, run, CliError, Loaded, RunOptions, Status, EXIT_PASS, EXIT_SCHEMA};
use clap::{Parser, Subcommand};

/// Thread count for the worker pool; the only setting read from the environment.
const THREADS_VAR: &str = "CAUSALKIT_THREADS";

#[derive(Parser)]
#[command(name = "causalkit", version, about = "Run causal-geometry verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write its report.
    Run {
        scenario: PathBuf,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of cells per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Check a scenario against the schema without running it.
    Validate { scenario: PathBuf },
    /// List the spacetimes, regions, commands and expression names scenarios may use.
    ListBuiltins,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("{THREADS_VAR}={v} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    code(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return code(EXIT_SCHEMA);
    }
    match cli.command {
        Cmd::Run { scenario, out, grid, seed, quiet } => {
            let start = Instant::now();
            let loaded = match Loaded::from_path(&scenario) {
                Ok(l) => l,
                Err(e) => return fail(&e),
            };
            let outcome = match run(&loaded, &RunOptions { out, grid, seed }) {
                Ok(o) => o,
                Err(e) => return fail(&e),
            };
            let r = &outcome.report;
            if let Some(a) = &r.abort {
                eprintln!(
                    "numerical abort during {}: {}\n  command {}, grid {}x{} (period {}, dx {}), cfl {}, seed {}",
                    a.stage, a.error, r.command, r.grid.cells, r.grid.cells, r.grid.period, r.grid.spacing, r.cfl, r.seed
                );
            }
            if !quiet {
                for c in &r.checks {
                    let value = c.value.map(|v| format!(" ({v:.6})")).unwrap_or_default();
                    println!("[{}] {}{value}", if c.pass { "pass" } else { "FAIL" }, c.name);
                }
                let status = match r.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Aborted => "aborted",
                };
                println!("{}: {status}, {} checks, {:.2} s", r.scenario, r.checks.len(), start.elapsed().as_secs_f64());
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            code(outcome.exit_code())
        }
        Cmd::Validate { scenario } => match Loaded::from_path(&scenario) {
            Ok(l) => {
                println!("{}: valid ({} command, sha256 {})", l.scenario.name, l.scenario.command.kind(), l.sha256);
                code(EXIT_PASS)
            }
            Err(e) => fail(&e),
        },
        Cmd::ListBuiltins => {
            for (group, names) in builtins() {
                println!("{group}: {}", names.join(", "));
            }
            code(EXIT_PASS)
        }
    }
}
