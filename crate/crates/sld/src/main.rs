//! Thin command-line wrapper around the library's experiment layer.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sld::cli::{self, RunConfig};

#[derive(Parser)]
#[command(name = "sld", version, about = "Stochastic Lagrangian descriptor fields for SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config worker count (0 = auto)
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Single-realization descriptor field (.sldf + .ppm)
    Field(CommonArgs),
    /// Ensemble of descriptor fields and their pointwise mean
    Ensemble {
        #[command(flatten)]
        common: CommonArgs,
        /// Also keep each member field
        #[arg(long)]
        keep_members: bool,
        /// Write the pairwise Frobenius distance matrix
        #[arg(long)]
        distances: bool,
    },
    /// Snapshot states of one point under many noise realizations
    Cloud(CommonArgs),
    /// Strong convergence-order study against the closed-form reference
    Convergence(CommonArgs),
    /// Stationary-orbit estimates and their statistics
    Stationary(CommonArgs),
    /// Re-image an existing field file
    Render {
        /// Field file (.sldf)
        input: PathBuf,
        /// Output image path (defaults to the input with a .ppm extension)
        #[arg(long)]
        out: Option<PathBuf>,
        /// "gray" or "viridis"
        #[arg(long, default_value = "viridis")]
        colormap: String,
        /// "minmax" or "percentile:LO,HI"
        #[arg(long, default_value = "percentile:2,98")]
        normalization: String,
        /// Escaped-cell color as R,G,B bytes
        #[arg(long, default_value = "128,128,128")]
        escaped_color: String,
    },
}

fn load(common: &CommonArgs) -> sld::Result<RunConfig> {
    let mut cfg = cli::load_config(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn run(command: Command) -> sld::Result<()> {
    match command {
        Command::Field(common) => cli::cmd_field(&load(&common)?, &common.out_dir),
        Command::Ensemble { common, keep_members, distances } => {
            cli::cmd_ensemble(&load(&common)?, &common.out_dir, keep_members, distances)
        }
        Command::Cloud(common) => cli::cmd_cloud(&load(&common)?, &common.out_dir),
        Command::Convergence(common) => cli::cmd_convergence(&load(&common)?, &common.out_dir),
        Command::Stationary(common) => cli::cmd_stationary(&load(&common)?, &common.out_dir),
        Command::Render { input, out, colormap, normalization, escaped_color } => {
            cli::cmd_render(
                &input,
                out,
                normalization.parse()?,
                colormap.parse()?,
                cli::parse_color(&escaped_color)?,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
