use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oia_core::grassmann::ManifoldParams;
use oia_core::harness::{self, Experiment, ExperimentConfig};
use oia_core::threshold::{threshold, ThresholdMethod};
use oia_core::Result;

/// Opportunistic interference alignment simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment and emit CSV.
    Run {
        experiment: String,
        /// Flat `key = value` config overriding the experiment defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output file (stdout if neither this nor `output_path` is set).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the stderr progress line.
        #[arg(long, short)]
        quiet: bool,
    },
    /// List registered experiments.
    List,
    /// Print a single 1-bit feedback threshold.
    Threshold {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        nr: usize,
        #[arg(long = "K")]
        k: u64,
        #[arg(long, default_value = "numeric")]
        method: String,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<24} {}", e.name(), e.description());
            }
        }
        Command::Threshold { d, nr, k, method } => {
            let method: ThresholdMethod = method.parse()?;
            let params = ManifoldParams::new(nr, d)?;
            println!("{}", harness::format_float(threshold(method, k, &params)?.x));
        }
        Command::Run { experiment, config, seed, trials, out, quiet } => {
            let experiment: Experiment = experiment.parse()?;
            let mut cfg = match config {
                Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?, Some(experiment))?,
                None => ExperimentConfig::defaults(experiment),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if out.is_some() {
                cfg.output_path = out;
            }
            cfg.validate()?;
            let text = harness::run_to_csv(&cfg, !quiet)?;
            if cfg.output_path.is_none() {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
