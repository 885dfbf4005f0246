use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use d2d_ee::experiment::{
    parse_key_values, run_experiment, summarize, write_csv_file, ExperimentConfig, TrialOutcome, THREADS_ENV,
};
use d2d_ee::Error;

/// Monte-Carlo sweeps of energy-efficient D2D resource allocation.
#[derive(Parser, Debug)]
#[command(name = "d2d-ee", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sweep and write one CSV row per (sweep value, trial).
    Run(RunArgs),
    /// Print mean/std/count of EE and iterations per sweep value.
    Summarize {
        /// CSV file written by `run`.
        path: PathBuf,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentArg>,
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Output CSV path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Extra `key=value` override, same keys as the config file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Record wall-clock time per trial (makes the CSV non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    #[value(name = "pb_sweep")]
    PbSweep,
    Iterations,
    Distance,
    Gamma,
}

impl ExperimentArg {
    fn key(self) -> &'static str {
        match self {
            ExperimentArg::PbSweep => "pb_sweep",
            ExperimentArg::Iterations => "iterations",
            ExperimentArg::Distance => "distance",
            ExperimentArg::Gamma => "gamma",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    NoCuLoss,
    CuLoss,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) => ExitCode::from(EXIT_IO),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut pairs = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
            parse_key_values(&text)?
        }
        None => BTreeMap::new(),
    };
    let mut set = |k: &str, v: String| {
        pairs.insert(k.to_string(), v);
    };
    if let Some(e) = args.experiment {
        set("experiment", e.key().to_string());
    }
    if let Some(n) = args.trials {
        set("trials", n.to_string());
    }
    if let Some(s) = args.seed {
        set("master_seed", s.to_string());
    }
    if let Some(m) = args.mode {
        let v = match m {
            ModeArg::NoCuLoss => "no-cu-loss",
            ModeArg::CuLoss => "cu-loss",
        };
        set("mode", v.to_string());
    }
    if let Some(out) = &args.out {
        set("output_path", out.display().to_string());
    }
    if args.timing {
        set("record_runtime", "true".to_string());
    }
    for item in &args.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got '{item}'")))?;
        set(k.trim(), v.trim().to_string());
    }
    ExperimentConfig::from_pairs(&pairs)
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let cfg = build_config(args)?;
    let report = run_experiment(&cfg)?;
    write_csv_file(&report.rows, &cfg.output_path)
        .map_err(|e| Error::Io(format!("cannot write {}: {e}", cfg.output_path.display())))?;
    eprintln!(
        "wrote {} rows to {} ({} not converged, {} failed; {:.1}% of pair/RB entries rejected by tau)",
        report.rows.len(),
        cfg.output_path.display(),
        report.count(TrialOutcome::NotConverged),
        report.count(TrialOutcome::Failed),
        100.0 * report.tau_filtered_fraction,
    );
    Ok(())
}

fn print_summary(path: &Path) -> Result<(), Error> {
    let table = summarize(path)?;
    println!("sweep_param,sweep_value,count,ee_per_hz_mean,ee_per_hz_std,iterations_mean,iterations_std");
    for s in table {
        println!(
            "{},{},{},{},{},{},{}",
            s.sweep_param,
            s.sweep_value,
            s.ee_per_hz.count,
            s.ee_per_hz.mean,
            s.ee_per_hz.std,
            s.iterations.mean,
            s.iterations.std
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Run(args)) => run(args),
        Some(Command::Summarize { path }) => print_summary(path),
        None => run(&cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::InvalidConfig(msg) = &e {
                if msg.contains(THREADS_ENV) {
                    eprintln!("hint: unset {THREADS_ENV} or set it to a positive integer");
                }
            }
            exit_code(&e)
        }
    }
}
