use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "sumdim", version, about = "Dimension of sumsets: exact checks and numerical experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal growth exponent γ* of a digit set in Z_m, or a random mass-growth check.
    Gamma(GammaArgs),
    /// γ* for every digit set of a given size, flagging those at or below a target.
    GammaSearch(SearchArgs),
    /// Box-counting slope of E + K from a JSON config.
    Boxdim(BoxdimArgs),
    /// Inflation map Ψ, transport plan and its Monte Carlo checks.
    Inflation(InflationArgs),
    /// Fourier decay fits and energy partial sums.
    Fourier(FourierArgs),
    /// Every closed-form lower bound for a scenario.
    Bounds(BoundsArgs),
    /// The seeded verification suite.
    VerifyAll(VerifyArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output directory [default: ./runs/<timestamp>-<subcommand>]
    #[arg(long, value_name = "DIR")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Print the primary result as JSON instead of text.
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupArg {
    None,
    Translation,
    Units,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GammaArgs {
    /// Base n of the digit set.
    #[arg(long)]
    pub n: u32,
    /// Digits, comma separated; must contain 0.
    #[arg(long, value_delimiter = ',', required = true)]
    pub digits: Vec<u32>,
    /// Work in Z_{n^L} with the level-L digit set.
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Enumerate every subset (the default).
    #[arg(long, conflicts_with = "random")]
    pub exhaustive: bool,
    /// Sample this many random subsets instead.
    #[arg(long, value_name = "TRIALS")]
    pub random: Option<u64>,
    #[arg(long, value_enum, default_value_t = DedupArg::Translation)]
    pub dedup: DedupArg,
    /// Allow exhaustive search for m ≥ 25.
    #[arg(long)]
    pub deep: bool,
    /// Check m̃(E+S) ≥ m̃(E)^γ on random E ⊂ Z_{n^L} instead of computing γ*.
    #[arg(long)]
    pub growth_check: bool,
    /// Random sets for --growth-check.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Exponent for --growth-check [default: γ* of the base digit set]
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: u32,
    /// Size of the digit sets.
    #[arg(long)]
    pub size: usize,
    /// Flag sets with γ* ≤ target [default: 1 − log(size)/log(n)]
    #[arg(long)]
    pub target: Option<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoxdimArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceArg {
    Parabola,
    Segment,
    Corner,
    Slabs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InflationArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub k: usize,
    /// Print the determinant and the second-class block check.
    #[arg(long)]
    pub verify_det: bool,
    /// Monte Carlo pushforward check with this many samples.
    #[arg(long, value_name = "SAMPLES")]
    pub mc: Option<usize>,
    /// Random boxes for --mc.
    #[arg(long, default_value_t = 20)]
    pub boxes: usize,
    /// Exponent probe of the slab functional over cubes of side 2^-1..2^-6.
    #[arg(long)]
    pub slab_probe: bool,
    /// Samples per cube for --slab-probe.
    #[arg(long, default_value_t = 100_000)]
    pub slab_samples: usize,
    /// Estimate m(Ψ(K^d)) for this surface.
    #[arg(long, value_enum)]
    pub surface: Option<SurfaceArg>,
    #[arg(long, default_value_t = 7)]
    pub grid_level: u32,
    #[arg(long, default_value_t = 400_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingArg {
    Parameter,
    Arclength,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FourierArgs {
    /// cantor:N:D1,D2,…  uniform  point:D  parabola  moment:D  segment:D
    #[arg(long, conflicts_with = "measure_file")]
    pub measure: Option<String>,
    /// Measure as JSON.
    #[arg(long, value_name = "FILE")]
    pub measure_file: Option<PathBuf>,
    /// Octave range m0:m1.
    #[arg(long, default_value = "4:12")]
    pub octaves: String,
    #[arg(long, default_value_t = 64)]
    pub per_octave: usize,
    /// Number of spread directions [default: 32 in the plane, 128 in space]
    #[arg(long)]
    pub directions: Option<usize>,
    /// Explicit direction, comma separated; repeatable.
    #[arg(long = "direction", value_name = "V")]
    pub direction: Vec<String>,
    /// Evaluate only at radii B^m for m in the octave range.
    #[arg(long, value_name = "B")]
    pub powers_of: Option<f64>,
    #[arg(long, value_enum, default_value_t = WeightingArg::Parameter)]
    pub weighting: WeightingArg,
    /// Energy exponent r; adds partial sums at Λ = 2^a..2^b.
    #[arg(long, value_name = "R")]
    pub energy: Option<f64>,
    /// Cutoff exponents a:b for --energy.
    #[arg(long, default_value = "6:14")]
    pub lambda: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundsArgs {
    /// Scenario (JSON).
    #[arg(long, value_name = "FILE")]
    pub scenario: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Include the exhaustive Z_27 level-lifting run.
    #[arg(long)]
    pub deep: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}
