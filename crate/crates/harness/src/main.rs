use clap::{Parser, Subcommand};
use fedband_harness::ingest::{ingest_csv_dataset, write_shards};
use fedband_harness::{load_config, run_scenario, run_stability, run_walkthrough, FileConfig, HarnessError};
use log::error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fedband",
    version,
    about = "Dynamic-UCB cluster selection for personalized federated learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one selection scenario and write its CSV artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the greedy switching walkthrough.
    Walkthrough {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate partitions of a small game and report stability and PoA.
    Stability {
        #[arg(long)]
        players: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a CSV dataset into non-IID user shards.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        users: usize,
        #[arg(long)]
        heterogeneity: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_or_default(path: Option<&Path>) -> Result<FileConfig, HarnessError> {
    path.map_or_else(|| Ok(FileConfig::default()), load_config)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run_scenario(&cfg, &out)?;
        }
        Command::Walkthrough { config, out } => {
            run_walkthrough(&config_or_default(config.as_deref())?, &out)?;
        }
        Command::Stability { players, config, out } => {
            run_stability(&config_or_default(config.as_deref())?, players, &out)?;
        }
        Command::Ingest {
            csv,
            target,
            users,
            heterogeneity,
            seed,
            out,
        } => {
            let (table, shards) = ingest_csv_dataset(&csv, &target, users, heterogeneity, seed)?;
            write_shards(&table, &shards, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FEDBAND_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
