//! `deflamps`: generate deformation maps, projector sequences, simulated
//! percepts and experiment stimuli from TOML run configurations.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "deflamps", version, about = "Dynamic-luminance projection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set geometry.distance_cm=220`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deformation-map sequence (DLF1).
    GenMap(RunArgs),
    /// Warp an image by a field sequence.
    Warp(RunArgs),
    /// Build projector frames from a target image and a field sequence.
    Synth(RunArgs),
    /// Simulate what the observer sees for a directory of projector frames.
    Simulate(RunArgs),
    /// Pick the movie frame closest to the temporal mean.
    Keyframe(RunArgs),
    /// Emit the visibility-experiment stimulus grid.
    Exp1Stim(RunArgs),
    /// Emit the magnitude-matching stimulus pairs.
    Exp2Stim(RunArgs),
    /// Fit cumulative Gaussians to trial data per condition.
    Analyze(RunArgs),
}

fn run(cmd: Command) -> CliResult<()> {
    macro_rules! dispatch {
        ($args:expr, $f:path) => {{
            let loaded = config::load($args.config.as_deref(), &$args.overrides)?;
            $f(loaded)
        }};
    }
    match cmd {
        Command::GenMap(a) => dispatch!(a, commands::gen_map),
        Command::Warp(a) => dispatch!(a, commands::warp),
        Command::Synth(a) => dispatch!(a, commands::synth),
        Command::Simulate(a) => dispatch!(a, commands::simulate),
        Command::Keyframe(a) => dispatch!(a, commands::keyframe),
        Command::Exp1Stim(a) => dispatch!(a, commands::exp1_stim),
        Command::Exp2Stim(a) => dispatch!(a, commands::exp2_stim),
        Command::Analyze(a) => dispatch!(a, commands::analyze),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("deflamps: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
