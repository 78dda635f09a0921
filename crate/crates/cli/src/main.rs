use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tad_cli::commands::{self, CliError};
use tad_cli::config::ScenarioConfig;
use tad_core::regions::Region;

/// Solver and simulator for the planar target-attacker-defender game.
#[derive(Parser)]
#[command(name = "tad", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a state into R_ed / R_ea / R_c / OnBarrier.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the capture game: aimpoint, headings, value, residuals.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Use the sweep-and-bisect oracle instead of the polynomial solver.
        #[arg(long)]
        oracle: bool,
        /// Oracle sweep resolution (default 100000).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Simulate an engagement; prints a run report and writes the trajectory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Trajectory output path (omit to skip the data file).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Integration step override.
        #[arg(long)]
        dt: Option<f64>,
        /// Capture-radius override.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Extract a barrier cross-section and region raster.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Barrier-points output path; the raster goes to `<out>_raster.csv`
        /// (omit to print barrier points to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the randomized verification suite.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default exit code is 2; this tool reserves 2 for solver
            // failures, so usage problems map to 1 (help/version stay 0).
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    Ok(ScenarioConfig::from_path(path)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Usage(format!("failed to write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Classify { config } => {
            let out = commands::run_classify(&load(&config)?)?;
            println!("{}", commands::to_json_pretty(&out));
        }
        Command::Solve { config, oracle, samples } => {
            let cfg = load(&config)?;
            let out = commands::run_solve(&cfg, oracle, samples)?;
            let mut doc = serde_json::to_value(&out)
                .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
            if out.region == Region::OnBarrier {
                if let Some(check) = commands::barrier_check_json(&cfg.game_state()?) {
                    doc["barrier_consistency"] = check;
                }
            }
            println!("{:#}", doc);
        }
        Command::Simulate { config, out, format, dt, eps } => {
            let cfg = load(&config)?;
            let (report, traj) = commands::run_simulate(&cfg, dt, eps)?;
            if let Some(path) = out {
                match format {
                    Format::Csv => {
                        let mut buf = Vec::new();
                        commands::write_trajectory_csv(&mut buf, &traj)
                            .map_err(|e| CliError::Usage(format!("csv write failed: {e}")))?;
                        write_file(&path, &buf)?;
                    }
                    Format::Json => {
                        let text = serde_json::to_string_pretty(&traj.samples)
                            .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
                        write_file(&path, text.as_bytes())?;
                    }
                }
            }
            println!("{}", commands::to_json_pretty(&report));
        }
        Command::Sweep { config, out, format } => {
            let cfg = load(&config)?;
            let sweep = commands::run_sweep(&cfg)?;
            match (out, format) {
                (Some(path), Format::Csv) => {
                    let mut buf = Vec::new();
                    commands::write_barrier_csv(&mut buf, &sweep.barrier_points)
                        .map_err(|e| CliError::Usage(format!("csv write failed: {e}")))?;
                    write_file(&path, &buf)?;
                    let raster_path = raster_sibling(&path);
                    let mut buf = Vec::new();
                    commands::write_raster_csv(&mut buf, &sweep.raster)
                        .map_err(|e| CliError::Usage(format!("csv write failed: {e}")))?;
                    write_file(&raster_path, &buf)?;
                }
                (Some(path), Format::Json) => {
                    let text = serde_json::to_string_pretty(&sweep)
                        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
                    write_file(&path, text.as_bytes())?;
                }
                (None, Format::Csv) => {
                    let mut stdout = std::io::stdout().lock();
                    commands::write_barrier_csv(&mut stdout, &sweep.barrier_points)
                        .map_err(|e| CliError::Usage(format!("csv write failed: {e}")))?;
                    stdout.flush().ok();
                }
                (None, Format::Json) => {
                    println!("{}", commands::to_json_pretty(&sweep));
                }
            }
        }
        Command::Verify { config, samples, seed } => {
            let cfg = match config {
                Some(path) => Some(load(&path)?),
                None => None,
            };
            let out = commands::run_verify(cfg.as_ref(), samples, seed)?;
            println!("{}", commands::to_json_pretty(&out));
            if !out.pass {
                let failed: Vec<&str> = out
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name.as_str())
                    .collect();
                return Err(CliError::Verification(format!(
                    "verification failed: {}",
                    failed.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn raster_sibling(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let mut name = format!("{stem}_raster.csv");
    if let Some(ext) = path.extension().and_then(|s| s.to_str()) {
        if ext != "csv" {
            name = format!("{stem}_raster.{ext}");
        }
    }
    path.with_file_name(name)
}
