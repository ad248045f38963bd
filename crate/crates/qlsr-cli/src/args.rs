use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qls_h2::FrequencyGrid;

#[derive(Debug, Parser)]
#[command(
    name = "qlsr",
    version,
    about = "Physically realizable H2 model reduction of linear quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Realizability, passivity and stability report for a system file.
    Check(CheckArgs),
    /// Reduce a system to fewer modes and certify the result.
    Reduce(ReduceArgs),
    /// H2 norm of the difference between two systems.
    H2(H2Args),
    /// Frequency response CSV for one or more systems.
    Bode(BodeArgs),
    /// Emit a seeded random realizable system (or a built-in example).
    Gen(GenArgs),
    /// Run both built-in examples against their reference values.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// observability-side lifting
    Q,
    /// controllability-side lifting
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    Optomech,
    Cascade,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    /// Realizability tolerance relative to the block scale.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_real: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub input: PathBuf,
    /// Number of modes to keep.
    #[arg(long, short = 'r')]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Q)]
    pub method: MethodArg,
    #[arg(long)]
    pub passive: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_real: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol_eq: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Only try this many mode subsets as starting points.
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Frequency grid `wmin:wmax:ppd` in rad/s for a full-vs-reduced Bode CSV.
    #[arg(long)]
    pub grid: Option<FrequencyGrid>,
    /// Where to write the Bode CSV (defaults to `<out>.bode.csv`).
    #[arg(long)]
    pub bode: Option<PathBuf>,
    /// Where to write the alternating-projection trace CSV of the chosen candidate.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Result JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the result JSON instead of the text report.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct H2Args {
    pub full: PathBuf,
    /// A system file or a reduction result file.
    pub reduced: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BodeArgs {
    /// System or reduction result files; columns are named after the file stem.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub grid: FrequencyGrid,
    /// Restrict to one quadrature channel, one-based `out,in`.
    #[arg(long, value_parser = parse_channel)]
    pub channel: Option<(usize, usize)>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Modes.
    #[arg(long, short = 'n', required_unless_present = "example")]
    pub n: Option<usize>,
    /// Input fields.
    #[arg(long, short = 'm', default_value_t = 1)]
    pub m: usize,
    /// Output fields (defaults to `m`).
    #[arg(long, short = 'l')]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, conflicts_with = "n")]
    pub example: Option<ExampleArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

fn parse_channel(s: &str) -> Result<(usize, usize), String> {
    let (o, i) = s
        .split_once(',')
        .ok_or_else(|| format!("expected out,in but got {s:?}"))?;
    let o: usize = o
        .trim()
        .parse()
        .map_err(|_| format!("bad output index {o:?}"))?;
    let i: usize = i
        .trim()
        .parse()
        .map_err(|_| format!("bad input index {i:?}"))?;
    if o == 0 || i == 0 {
        return Err("channel indices are one-based".into());
    }
    Ok((o - 1, i - 1))
}
