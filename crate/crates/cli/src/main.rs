// SPDX-License-Identifier: Apache-2.0

//! `stego`: simulate, calibrate, embed, extract and analyze from the shell.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "stego",
    version,
    about = "Adaptive LSB steganography with syndrome-trellis codes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the embedding simulator to a cover: stego image plus modification map.
    Simulate(SimulateArgs),
    /// Scale a cost map so its probabilities carry a target payload.
    Calibrate(CalibrateArgs),
    /// Derive a cost map from a probability map or from image texture.
    Costs(CostsArgs),
    /// Hide a message with syndrome-trellis coding.
    Embed(EmbedArgs),
    /// Recover a message using the manifest written by `embed`.
    Extract(ExtractArgs),
    /// Print statistics for an image or a probability map.
    Analyze(AnalyzeArgs),
    /// Write the 30-kernel SRM filter table as text.
    ExportKernels(ExportKernelsArgs),
    /// Run the commands listed in a job file, several at a time.
    Batch(BatchArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Staircase,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scan {
    RowMajor,
    Interleaved,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long)]
    pub pmap: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Staircase)]
    pub mode: Mode,
    #[arg(long, default_value_t = stego_core::simulator::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Stego image (PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Modification map (MMAP container).
    #[arg(long)]
    pub modmap: PathBuf,
    /// Defaults to `<out>.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Cost map (CMAP container).
    #[arg(long)]
    pub costs: PathBuf,
    /// Target payload in bits per pixel.
    #[arg(long)]
    pub payload: f64,
    /// Probability map (PMAP container).
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CostsArgs {
    #[arg(long, required_unless_present = "image", conflicts_with = "image")]
    pub pmap: Option<PathBuf>,
    /// Texture-adaptive costs from SRM residual energy.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Cost map (CMAP container).
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub cover: PathBuf,
    #[arg(long)]
    pub pmap: PathBuf,
    /// Raw bit file, or a PGM thresholded at 128.
    #[arg(long)]
    pub message: PathBuf,
    /// Pad the message with zeros to round(Q·H·W) bits.
    #[arg(long)]
    pub payload: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constraint height of the trellis.
    #[arg(long, default_value_t = stego_core::stc::DEFAULT_CONSTRAINT_HEIGHT)]
    pub height: usize,
    #[arg(long, value_enum, default_value_t = Scan::Interleaved)]
    pub scan: Scan,
    /// Stego image (PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub stego: PathBuf,
    /// Manifest written by `embed`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Message output. A `.pgm` name writes an image when the embedded
    /// message was one; anything else writes a raw bit file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, required_unless_present = "pmap", conflicts_with = "pmap")]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub pmap: Option<PathBuf>,
    /// With `--image`: also calibrate texture costs to this payload and
    /// report the resulting probability map.
    #[arg(long, requires = "image")]
    pub payload: Option<f64>,
    /// Report mean probability over an N×N grid of tiles.
    #[arg(long, default_value_t = 2)]
    pub tiles: usize,
}

#[derive(Debug, Args)]
pub struct ExportKernelsArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// One command per line, arguments separated by whitespace; `#` starts
    /// a comment line.
    pub jobs_file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(CliError { code, message }) => {
            eprintln!("stego: {message}");
            ExitCode::from(code)
        }
    }
}
