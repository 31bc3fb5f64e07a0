//! `chialvo`: run ring-star network simulations, parameter sweeps and
//! single-neuron studies from TOML configs.

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Common;
use error::CliError;
use output::TableFormat;

#[derive(Parser)]
#[command(name = "chialvo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Override the base seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "CHIALVO_THREADS")]
    threads: Option<usize>,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one network configuration.
    Simulate {
        #[command(flatten)]
        shared: Shared,
        /// Also write the full post-transient trajectory.
        #[arg(long)]
        emit_trajectory: bool,
    },
    /// Sweep one parameter (bifurcation scan) or two (grid).
    Sweep {
        #[command(flatten)]
        shared: Shared,
    },
    /// Study the isolated neuron.
    SingleNeuron {
        #[command(flatten)]
        shared: Shared,
    },
}

impl From<Shared> for Common {
    fn from(s: Shared) -> Self {
        Common {
            config: s.config,
            out: s.out,
            seed: s.seed,
            threads: s.threads,
            format: s.format,
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("cannot configure threads: {e}"))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { shared, emit_trajectory } => {
            let c = Common::from(shared);
            init_threads(c.threads).and_then(|_| commands::simulate::run_command(&c, emit_trajectory))
        }
        Command::Sweep { shared } => {
            let c = Common::from(shared);
            init_threads(c.threads).and_then(|_| commands::sweep::run_command(&c))
        }
        Command::SingleNeuron { shared } => {
            let c = Common::from(shared);
            init_threads(c.threads).and_then(|_| commands::single_neuron::run_command(&c))
        }
    };
    match outcome {
        Ok(m) => {
            println!("wrote {} artifacts in {:.2}s", m.artifacts.len(), m.duration_secs);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
