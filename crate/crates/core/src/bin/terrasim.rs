//! Command-line front end: run scenarios, validate them, or print the
//! built-in defaults.
//!
//! Exit codes: 0 on success, 2 when a scenario fails validation or the
//! stability gate, 3 on I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use terrasim_core::engine::{run_simulation, EngineError};
use terrasim_core::grid::{build_disk_grid, enforce_stability};
use terrasim_core::output::DirectorySink;
use terrasim_core::scenario::{load_scenario, Scenario};

const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "terrasim",
    version,
    about = "Deterministic territory simulator: commuting, jobs, efficiency, and wealth on a disk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write series.csv, field snapshots, and optional
    /// heatmap frames into an output directory.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the number of simulated days.
        #[arg(long)]
        days: Option<u32>,
        /// Override the snapshot cadence (in days).
        #[arg(long = "snapshot-every")]
        snapshot_every: Option<u32>,
        /// Write PGM heatmap frames alongside the CSV snapshots.
        #[arg(long)]
        heatmaps: bool,
    },
    /// Print the default scenario as JSON.
    PrintDefaults,
    /// Validate a scenario and print its stability report without running.
    Check {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            days,
            snapshot_every,
            heatmaps,
        } => cmd_run(&scenario, &out, days, snapshot_every, heatmaps),
        Command::PrintDefaults => {
            println!("{}", Scenario::default().to_pretty_json());
            ExitCode::SUCCESS
        }
        Command::Check { scenario } => cmd_check(&scenario),
    }
}

/// Read and validate a scenario file, or produce the exit code for the
/// failure (3 unreadable, 2 invalid).
fn read_scenario(path: &Path) -> Result<Scenario, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    load_scenario(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID)
    })
}

fn cmd_run(
    scenario_path: &Path,
    out: &Path,
    days: Option<u32>,
    snapshot_every: Option<u32>,
    heatmaps: bool,
) -> ExitCode {
    let mut scenario = match read_scenario(scenario_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Some(days) = days {
        scenario.run.days = days;
    }
    if let Some(every) = snapshot_every {
        scenario.output.snapshot_every = every;
    }
    if heatmaps {
        scenario.output.heatmaps = true;
    }
    if let Err(e) = scenario.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID);
    }

    let mut sink = match DirectorySink::new(out, scenario.output.heatmaps) {
        Ok(sink) => sink,
        Err(e) => {
            eprintln!("error: cannot prepare {}: {e}", out.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    match run_simulation(&scenario, &mut sink) {
        Ok(state) => {
            println!(
                "simulated {} day(s) on a {}x{} grid into {}",
                state.series.len(),
                scenario.grid.nx,
                scenario.grid.nx,
                out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e @ EngineError::Io(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn cmd_check(scenario_path: &Path) -> ExitCode {
    let scenario = match read_scenario(scenario_path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    // Validation passed; the grid and coefficient constructors below cannot
    // fail on a validated scenario.
    let grid = match build_disk_grid(scenario.grid.radius, scenario.grid.nx) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let params = scenario.params().expect("validated");
    let schedule = scenario.schedule().expect("validated");
    let report = enforce_stability(&params, &schedule, &grid, scenario.run.substeps_per_day);
    println!("scenario ok: {} cells, h = {}", grid.cell_count(), grid.h());
    println!("{report}");
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVALID)
    }
}
