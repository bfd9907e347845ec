use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roam::par::Execution;
use roam::sim::{self, output, Scenario};
use roam::RoamError;

#[derive(Parser)]
#[command(name = "roam", version, about = "Rotational obstacle avoidance: simulate scenarios and inspect fields")]
struct Cli {
    /// Run on a single thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate every start point; writes trajectories.csv, outcomes.json,
    /// metrics.json and a copy of the scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a directory written by `simulate`.
    Metrics { dir: PathBuf },
    /// Sample the modulated field on a grid.
    Field {
        scenario: PathBuf,
        /// Grid size as NX,NY.
        #[arg(long, value_parser = parse_grid, default_value = "50,50")]
        grid: (usize, usize),
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario file and list every problem found.
    Validate { scenario: PathBuf },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NX,NY")?;
    let nx: usize = a.trim().parse().map_err(|e| format!("NX: {e}"))?;
    let ny: usize = b.trim().parse().map_err(|e| format!("NY: {e}"))?;
    if nx == 0 || ny == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((nx, ny))
}

fn load(path: &Path) -> Result<(String, Scenario), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match Scenario::from_json(&text) {
        Ok(s) => Ok((text, s)),
        Err(RoamError::ScenarioInvalid(list)) => {
            Err(format!("{} is invalid:\n  {}", path.display(), list.join("\n  ")))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Simulate { scenario, out } => {
            let (text, scenario) = load(&scenario)?;
            let result = sim::integrate(&scenario, exec);
            output::write_run(&out, &text, &scenario, &result).map_err(|e| format!("{}: {e}", out.display()))?;
            let collisions = result.trajectories.iter().filter(|t| t.outcome == sim::Outcome::Collision).count();
            println!(
                "{} trajectories integrated, {} starts skipped, {} collisions; results in {}",
                result.trajectories.len(),
                result.skipped.len(),
                collisions,
                out.display()
            );
        }
        Command::Metrics { dir } => {
            let (_, scenario) = load(&dir.join("scenario.json"))?;
            let trajectories = output::read_trajectories(&dir.join("trajectories.csv"), &scenario)
                .map_err(|e| format!("{}: {e}", dir.display()))?;
            if trajectories.is_empty() {
                return Err("no trajectories found".into());
            }
            print!("{}", output::metrics_json(&sim::compute_metrics(&trajectories, &scenario)));
        }
        Command::Field { scenario, grid, out } => {
            let (_, scenario) = load(&scenario)?;
            let bounds = sim::sampling_bounds(&scenario);
            let samples = sim::sample_field(&scenario, &bounds, grid.0, grid.1, exec);
            let file = fs::File::create(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            output::write_field(BufWriter::new(file), &samples).map_err(|e| e.to_string())?;
        }
        Command::Validate { scenario: path } => {
            let (_, s) = load(&path)?;
            let trees = s.environment.trees.len();
            let singles = s.environment.singles.len();
            let free = s.integration.start_points.iter().filter(|x| s.environment.gamma_min(x) >= 1.0).count();
            println!(
                "{}: ok ({}D, {singles} obstacles, {trees} trees, {free}/{} start points in free space)",
                path.display(),
                s.dimension,
                s.integration.start_points.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
