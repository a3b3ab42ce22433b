use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dqobs::error::RunError;
use dqobs::observability::DEFAULT_RANK_TOL;
use dqobs::scenario::{self, emit, parse_scenario, ObservabilityOptions, OutputFormat};

/// Relative pose simulation and single-marker observability analysis.
#[derive(Parser)]
#[command(name = "dqobs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario and write its trajectory and marker measurements.
    Simulate {
        #[command(flatten)]
        input: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate, then build and rank the observability matrix at chosen epochs.
    Observability {
        #[command(flatten)]
        input: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Epochs to analyse, spread evenly over the trajectory.
        #[arg(long, default_value_t = 1)]
        epochs: usize,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        /// Also compute the empirical observability Gramian over the horizon.
        #[arg(long)]
        gramian: bool,
        /// Also run a randomized rank sweep with this many samples.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run the randomized lemma and invariant checks.
    Check {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank the observability matrix at random states and markers.
    Sweep {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

fn open(out: &Option<PathBuf>) -> Result<Box<dyn Write>, RunError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| RunError::Output(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(value: &impl Serialize, out: &Option<PathBuf>) -> Result<(), RunError> {
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| RunError::Output(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| RunError::Output(e.to_string()))
}

fn load(input: &ScenarioArgs) -> Result<scenario::Scenario, RunError> {
    let mut s = parse_scenario(&input.scenario)?;
    if let Some(seed) = input.seed {
        s.doc.seed = seed;
        s.seed = seed;
    }
    Ok(s)
}

/// `Ok(false)` means the run finished but a rank or check verdict failed.
fn run(cli: Cli) -> Result<bool, RunError> {
    match cli.command {
        Command::Simulate { input, output } => {
            let report = scenario::run_simulate(&load(&input)?)?;
            let mut w = open(&output.out)?;
            emit(&report, output.format.into(), &mut w)?;
            w.flush().map_err(|e| RunError::Output(e.to_string()))?;
            Ok(true)
        }
        Command::Observability {
            input,
            output,
            epochs,
            rank_tol,
            gramian,
            samples,
        } => {
            let opts = ObservabilityOptions {
                epochs,
                rank_tol,
                gramian,
                sweep_samples: samples,
            };
            let report = scenario::run_observability(&load(&input)?, &opts)?;
            let mut w = open(&output.out)?;
            emit(&report, output.format.into(), &mut w)?;
            w.flush().map_err(|e| RunError::Output(e.to_string()))?;
            for e in report.observability.iter().filter(|e| !e.rank.full_rank) {
                log::error!("rank {} at t = {}", e.rank.numeric_rank, e.t);
            }
            Ok(report.all_full_rank())
        }
        Command::Check {
            samples,
            seed,
            rank_tol,
            out,
        } => {
            let report = scenario::run_check(samples, seed, rank_tol)?;
            write_json(&report, &out)?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                log::error!("check failed: {} ({})", c.name, c.detail);
            }
            Ok(report.passed)
        }
        Command::Sweep {
            samples,
            seed,
            rank_tol,
            out,
        } => {
            let summary = scenario::run_sweep(samples, seed, rank_tol)?;
            write_json(&summary, &out)?;
            if !summary.deficient.is_empty() {
                log::error!("{} of {} samples rank deficient", summary.deficient.len(), samples);
            }
            Ok(summary.full_rank_count == summary.samples)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
