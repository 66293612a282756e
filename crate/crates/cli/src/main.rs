use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod repro;

use config::RunConfig;
use error::CliError;

/// Resource-efficient fast-forwarding experiments.
#[derive(Parser)]
#[command(name = "reff", version)]
struct Cli {
    /// Output directory.
    #[arg(long, short, global = true, env = "REFF_OUT_DIR", default_value = "reff-out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a training dataset.
    GenData {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Train the ansatz; generates the dataset from the config unless `--data` is given.
    Train {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Fidelity series and bound reports for trained parameters.
    Evaluate {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the analytic-identity oracle suite.
    Verify {
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Evaluate fidelity bounds, thresholds and data-size prescriptions.
    Bounds {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Run a reference experiment from a bundled config.
    Repro {
        figure: repro::Figure,
        /// Smallest instance only.
        #[arg(long)]
        quick: bool,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let cfg = RunConfig::parse(&text)?;
    if let Some(t) = cfg.threads {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::GenData { config } => commands::gen_data(&load(&config)?, out),
        Command::Train { config, data } => commands::train(&load(&config)?, data.as_deref(), out).map(drop),
        Command::Evaluate { config, params, data } => {
            commands::evaluate(&load(&config)?, &params, data.as_deref(), out).map(drop)
        }
        Command::Verify { config } => {
            let cfg = config.as_deref().map(load).transpose()?;
            commands::verify(cfg.as_ref(), out).map(drop)
        }
        Command::Bounds { config } => commands::bounds(&load(&config)?, out).map(drop),
        Command::Repro { figure, quick } => repro::repro(figure, out, quick),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => error::report(&e),
    }
}
