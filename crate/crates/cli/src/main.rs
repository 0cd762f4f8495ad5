//! `te-shape`: solve markets, check preference boxes, run experiments.
//!
//! Exit codes: 0 success (or admissible), 1 not admissible, 2 bad input,
//! 3 solver or numerical failure.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub const THREADS_ENV: &str = "TE_SHAPE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "te-shape", version, about = "Competitive-equilibrium pricing for transactive energy markets")]
struct Cli {
    /// Worker threads for experiments (default: available parallelism).
    /// TE_SHAPE_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log more to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clear a market read from an instance file.
    Solve {
        instance: PathBuf,
        /// Override the model given in the file.
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, default_value = "auto")]
        method: String,
        /// Write the result JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a preference box keeps the price below a threshold.
    ShapeCheck(commands::ShapeArgs),
    /// Run a seeded Monte Carlo experiment.
    Experiment {
        spec: PathBuf,
        /// Override the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the fourth agent's satiation load over 5..=30.
    Sweep {
        instance: PathBuf,
        /// CSV output (default: table on stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate distributed clearing over a communication graph.
    Consensus {
        instance: PathBuf,
        /// Graph JSON; defaults to the complete graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        rounds: usize,
        #[arg(long, default_value = "flood")]
        mode: String,
        /// Required accuracy of the averaged production.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Write the per-round trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Mtes,
    #[value(name = "mtes_st")]
    MtesSt,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_env("RUST_LOG").init();

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, commands::CliError> {
    commands::configure_threads(cli.threads)?;
    match cli.command {
        Command::Solve { instance, model, method, out } => {
            let model = model.map(|m| match m {
                ModelArg::Mtes => te_shape::ModelKind::Mtes,
                ModelArg::MtesSt => te_shape::ModelKind::MtesSt,
            });
            commands::solve(&instance, model, &method, out.as_deref())
        }
        Command::ShapeCheck(args) => commands::shape_check(&args),
        Command::Experiment { spec, seed, out } => commands::experiment(&spec, seed, &out),
        Command::Sweep { instance, out } => commands::sweep(&instance, out.as_deref()),
        Command::Consensus { instance, graph, rounds, mode, tolerance, trace } => {
            commands::consensus(&instance, graph.as_deref(), rounds, &mode, tolerance, trace.as_deref())
        }
    }
}
