use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multikin_cli::{bench, simulate, verify, CliError};

#[derive(Parser)]
#[command(name = "multikin", version, about = "Multi-particle aggregation kinetics with tensor-train kernels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Simulation config (JSON) or a run manifest
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Worker counts, comma separated
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    workers: Vec<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write moments, snapshots and a run manifest
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
    /// Compare the TT and CP operators with the dense oracle
    Verify {
        #[command(flatten)]
        common: Common,
        /// Seed for the random test states
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time the configured run over several worker counts
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common, output } => {
            let dir = simulate(&common.config, output.as_deref(), &common.workers)?;
            println!("wrote {}", dir.display());
        }
        Command::Verify { common, seed } => {
            verify(&common.config, seed, &common.workers)?;
            println!("all fast paths within tolerance");
        }
        Command::Bench { common, output } => {
            let path = bench(&common.config, output.as_deref(), &common.workers)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
