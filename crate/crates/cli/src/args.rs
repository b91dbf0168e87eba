use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "diskinterp", version, about = "Interpolating sequences, Carleson measures and Möbius-invariant spaces on the unit disk")]
pub struct Cli {
    /// Omit the generation time from reports, making them byte-reproducible.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "DISKINTERP_JOBS")]
    pub jobs: Option<usize>,

    /// Output JSON path; standard output when absent.
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,

    /// Per-level CSV path; defaults to the output path with a `.csv`
    /// extension when an output path is given.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate a point sequence.
    Gen(GenArgs),
    /// Separation constants and Blaschke sum of a sequence.
    Metrics(InputArgs),
    /// Carleson constants of the measure `Σ (1-|z_n|^2)^s δ_{z_n}`.
    Carleson(CarlesonArgs),
    /// Membership of a Blaschke product in `F(p, p-2, s)`.
    Inner(InnerArgs),
    /// Norms and seminorms of an analytic function.
    Seminorm(SeminormArgs),
    /// Interpolation by a perturbed Blaschke product.
    Interpolate(InterpolateArgs),
    /// Interpolating sequences for `F(p, p-2, s) ∩ H^∞`.
    Theorem21(Theorem21Args),
    /// Blaschke products in `F(p, p-2, s)`.
    Theorem32(Theorem32Args),
    /// Growth of `∫ (1-|w|^2)^t / |1 - z̄w|^(2+t+c) dA(w)`.
    Zhu(ZhuArgs),
    /// Two-kernel integral bound.
    Forelli(ForelliArgs),
    /// Closure of a Bloch function in `F(p, p-2, s)`.
    Closure(ClosureArgs),
    /// Log-tempered Carleson sum, or the strict-inclusion witness checks.
    Logtempered(LogTemperedArgs),
    /// Multipliers of `B_p(s)` against `F(p, p-2, s) ∩ H^∞`.
    Prop22(Prop22Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Metrics(_) => "metrics",
            Command::Carleson(_) => "carleson",
            Command::Inner(_) => "inner",
            Command::Seminorm(_) => "seminorm",
            Command::Interpolate(_) => "interpolate",
            Command::Theorem21(_) => "theorem21",
            Command::Theorem32(_) => "theorem32",
            Command::Zhu(_) => "zhu",
            Command::Forelli(_) => "forelli",
            Command::Closure(_) => "closure",
            Command::Logtempered(_) => "logtempered",
            Command::Prop22(_) => "prop22",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Radial,
    Clustered,
    Bwy,
    Stolz,
    PerturbedRadial,
    RandomSeparated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibration {
    Default,
    FullCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqFormat {
    Json,
    Text,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Ratio of the radial families.
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Number of points (radial, Stolz, random families).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Target exponent (clustered label, witness candidate).
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 0.9)]
    pub growth: f64,
    #[arg(long, default_value_t = 8)]
    pub levels: u32,
    #[arg(long, default_value_t = 0.5)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.3)]
    pub min_rho: f64,
    #[arg(long, default_value_t = 0.99)]
    pub max_radius: f64,
    #[arg(long, value_enum, default_value_t = Calibration::Default)]
    pub calibration: Calibration,
    /// Seed of the random families.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SeqFormat::Json)]
    pub format: SeqFormat,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Sequence file: JSON (bare pairs, `{points, label}`, or a `gen`
    /// report) or text with one `re im` pair per line.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct NetArgs {
    /// Deepest ring of the sampling net (raised to cover the input).
    #[arg(long, default_value_t = 14)]
    pub net_levels: u32,
    /// Angles per ring at level `j` are `density * 2^j` before capping.
    #[arg(long, default_value_t = 8)]
    pub net_density: usize,
    #[arg(long, default_value_t = 256)]
    pub net_ring_cap: usize,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct ThresholdArgs {
    /// Log-log slopes below this are BOUNDED.
    #[arg(long, default_value_t = 0.02)]
    pub bounded_slope: f64,
    /// Log-log slopes above this are DIVERGENT.
    #[arg(long, default_value_t = 0.1)]
    pub divergent_slope: f64,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct QuadArgs {
    /// Relative tolerance of the area quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Minimum number of radial shells.
    #[arg(long)]
    pub boundary_levels: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarlesonTest {
    Box,
    Kernel,
    Bps,
}

#[derive(Debug, Args, Serialize)]
pub struct CarlesonArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_enum, default_value_t = CarlesonTest::Box)]
    pub test: CarlesonTest,
    /// Second exponent of the kernel form (defaults to `s`).
    #[arg(long)]
    pub t: Option<f64>,
    /// Deepest box generation (defaults to two beyond the deepest point).
    #[arg(long)]
    pub generations: Option<u32>,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InnerArgs {
    #[arg(long)]
    pub zeros: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub s: f64,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct FunctionArgs {
    /// `identity`, `log`, inline JSON, or a JSON file describing the
    /// function.
    #[arg(long)]
    pub function: Option<String>,
    /// Use the Blaschke product with these zeros instead.
    #[arg(long, conflicts_with = "function")]
    pub zeros: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Bps,
    Fpps,
    Bloch,
    Hinf,
    Multiplier,
}

#[derive(Debug, Args, Serialize)]
pub struct SeminormArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    #[arg(long, value_enum, default_value_t = NormKind::Fpps)]
    pub norm: NormKind,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub quadrature: QuadArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct InterpolateArgs {
    #[arg(long)]
    pub nodes: PathBuf,
    /// JSON array of `[re, im]` target values; random values in the disk
    /// drawn from `--seed` when absent.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Theorem21Args {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Seeded interpolation trials of the constructive step.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct Theorem32Args {
    #[arg(long)]
    pub zeros: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub quadrature: QuadArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ZhuArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Samples `1 - 2^-j` for `j = 1..=samples`.
    #[arg(long, default_value_t = 14)]
    pub samples: u32,
    #[command(flatten)]
    pub quadrature: QuadArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ForelliArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub quadrature: QuadArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ClosureArgs {
    #[command(flatten)]
    pub function: FunctionArgs,
    /// Comma-separated ε grid.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2, 0.4])]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub quadrature: QuadArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct LogTemperedArgs {
    /// Sequence to test; omit together with `--witness`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    /// Run the strict-inclusion witness checks on the generated candidate.
    #[arg(long)]
    pub witness: bool,
    /// Levels of the witness candidate.
    #[arg(long, default_value_t = 12)]
    pub levels: u32,
    /// Exponents `t > s` for the witness checks.
    #[arg(long, value_delimiter = ',', default_values_t = [0.7, 0.9])]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct Prop22Args {
    /// Functions of the family (repeatable): `identity`, `log`, inline JSON
    /// or a JSON file.
    #[arg(long = "function", required = true)]
    pub functions: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 10)]
    pub net_levels: u32,
    #[command(flatten)]
    pub quadrature: QuadArgs,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}
