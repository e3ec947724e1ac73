//! Command-line harness: single runs, parameter sweeps, convolutional
//! comparisons and field slicing, all written as CSV and PPM files.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use distkit::{Method, ShapeSpec};

pub mod commands;

#[derive(Debug, Parser)]
#[command(name = "distkit", version, about = "Distance-to-boundary estimation on binary images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one method at one parameter value and score it against the exact distance.
    Compute(ComputeArgs),
    /// Score several methods over a grid of t values.
    Sweep(SweepArgs),
    /// Compare SoftMin, LogConv and their blend at one λ.
    CompareConv(CompareArgs),
    /// Extract one row of a CSV field dump.
    Slice(SliceArgs),
}

/// Where the mask comes from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// PGM image (P2 or P5); bright pixels are inside.
    #[arg(long, value_name = "PGM")]
    pub input: Option<PathBuf>,
    /// Built-in shape, e.g. `disk:r=20,canvas=64` or `strip:w=31,canvas=200x40`.
    #[arg(long, value_name = "SPEC")]
    pub shape: Option<ShapeSpec>,
}

#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
pub struct Scale {
    /// Diffusion time; λ = 1/√t.
    #[arg(long = "t", value_name = "T")]
    pub t: Option<f64>,
    #[arg(long, value_name = "LAMBDA")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ConvFlags {
    /// Blend constant K.
    #[arg(long = "K", value_name = "K", default_value_t = distkit::conv::DEFAULT_K)]
    pub k: f64,
    /// Boundary dimension used by the LogConv prefactor and the blend weights.
    #[arg(long = "d", value_name = "D", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub d: u32,
    /// Drop the λ^d factor from LogConv (the blend keeps it).
    #[arg(long)]
    pub no_prefactor: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_name = "METHOD")]
    pub method: Method,
    #[command(flatten)]
    pub scale: Scale,
    #[command(flatten)]
    pub conv: ConvFlags,
    /// Report the raw differential estimate instead of the normalized one.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated method list.
    #[arg(long, value_delimiter = ',', default_value = "heat,taylor1,taylor2")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 0.2)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 25)]
    pub t_steps: usize,
    /// Geometric instead of uniform spacing in t.
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    pub conv: ConvFlags,
    #[arg(long, conflicts_with = "both")]
    pub no_normalize: bool,
    /// Emit normalized and raw rows for every differential method.
    #[arg(long)]
    pub both: bool,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub scale: Scale,
    #[command(flatten)]
    pub conv: ConvFlags,
    /// Row for the slice and error curve; defaults to the middle row.
    #[arg(long)]
    pub row: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SliceArgs {
    /// CSV field dump as written by `compute`.
    #[arg(long, value_name = "CSV")]
    pub field: PathBuf,
    #[arg(long)]
    pub row: usize,
    /// Mask source; without one, inside nodes are the defined nodes whose four
    /// neighbours are all defined.
    #[arg(long, value_name = "PGM", conflicts_with = "shape")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub shape: Option<ShapeSpec>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// How a command finished when it did not hit a fatal error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Flagged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Clean => 0,
            Outcome::Flagged => 1,
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Compute(args) => commands::compute(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::CompareConv(args) => commands::compare_conv(&args),
        Command::Slice(args) => commands::slice(&args),
    }
}
