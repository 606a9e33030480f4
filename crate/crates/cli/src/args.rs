use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use halfint_core::experiments::{Character, Smoothing};
use halfint_core::sieve::PrMode;

/// Parses `100000`, `1e5`, `10^5` or `3*10^4`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = if let Some((base, exp)) = t.split_once('^') {
        let (scale, base) = match base.split_once('*') {
            Some((k, b)) => (k.trim().parse::<f64>().map_err(|e| format!("{s}: {e}"))?, b),
            None => (1.0, base),
        };
        let b: f64 = base.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        let e: f64 = exp.trim().parse().map_err(|e| format!("{s}: {e}"))?;
        scale * b.powf(e)
    } else {
        t.parse::<f64>().map_err(|e| format!("{s}: {e}"))?
    };
    if !v.is_finite() {
        return Err(format!("{s}: not a finite number"));
    }
    Ok(v)
}

pub fn parse_count(s: &str) -> Result<usize, String> {
    let v = parse_number(s)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("{s}: expected a non-negative integer"));
    }
    Ok(v as usize)
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "halfint", version, about = "Half-integral weight sign-change experiments")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file; the run manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Construct or certify the plus-space eigenform.
    #[command(subcommand)]
    Form(FormCmd),
    /// Generalized von Mangoldt tables.
    #[command(subcommand)]
    Lambda(LambdaCmd),
    /// Generalized Vaughan identity checks.
    #[command(subcommand)]
    Vaughan(VaughanCmd),
    /// Partial sums over almost primes.
    #[command(subcommand)]
    Sums(SumsCmd),
    /// Sign changes over almost primes or primes.
    #[command(subcommand)]
    Signs(SignsCmd),
    /// Second moments.
    #[command(subcommand)]
    Moment(MomentCmd),
    /// Growth of running maxima.
    #[command(subcommand)]
    Growth(GrowthCmd),
    /// Central values of quadratic twists of the lift.
    #[command(subcommand)]
    Lvalue(LvalueCmd),
    /// Rerun the command recorded in a run manifest.
    Replay(Replay),
}

#[derive(Debug, Args, Serialize)]
pub struct Replay {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum FormCmd {
    Build(FormBuild),
    Check(FormCheck),
}

#[derive(Debug, Args, Serialize)]
pub struct FormBuild {
    #[arg(long, default_value_t = 6)]
    pub ell: u32,
    /// Number of coefficients `c(0) .. c(N-1)`.
    #[arg(long, value_parser = parse_count)]
    pub prec: usize,
    /// Override the constraint horizon.
    #[arg(long, value_parser = parse_count)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct FormCheck {
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    pub primes: Vec<u64>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum LambdaCmd {
    Table(LambdaTable),
}

#[derive(Debug, Args, Serialize)]
pub struct LambdaTable {
    #[arg(long)]
    pub r: u32,
    #[arg(long, value_parser = parse_count)]
    pub x: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum VaughanCmd {
    Verify(VaughanVerify),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VaughanKind {
    /// Four-term identity with arbitrary cut-offs.
    Identity,
    /// Two-term form for `Q < n ≤ QR`.
    TwoTerm,
    /// Dyadic reassembly for `Q < n ≤ QR`.
    Dyadic,
}

#[derive(Debug, Args, Serialize)]
pub struct VaughanVerify {
    /// Largest order; orders are drawn from `1..=r`.
    #[arg(long)]
    pub r: u32,
    #[arg(long, value_parser = parse_count)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_count, default_value = "10^6")]
    pub nmax: usize,
    #[arg(long, value_enum, default_value = "identity")]
    pub kind: VaughanKind,
    /// Fixed `Q` for every case instead of the seeded draw.
    #[arg(long = "q", value_parser = parse_number, requires = "r_cut")]
    pub q_cut: Option<f64>,
    /// Fixed `R` for every case instead of the seeded draw.
    #[arg(long = "big-r", value_parser = parse_number, requires = "q_cut")]
    pub r_cut: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Distinct,
    WithMultiplicity,
}

impl From<ModeArg> for PrMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Distinct => PrMode::Distinct,
            ModeArg::WithMultiplicity => PrMode::WithMultiplicity,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterArg {
    None,
    Principal4,
    Nonprincipal4,
}

impl From<CharacterArg> for Character {
    fn from(c: CharacterArg) -> Self {
        match c {
            CharacterArg::None => Character::None,
            CharacterArg::Principal4 => Character::Principal4,
            CharacterArg::Nonprincipal4 => Character::Nonprincipal4,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingArg {
    None,
    Linear,
}

impl From<SmoothingArg> for Smoothing {
    fn from(s: SmoothingArg) -> Self {
        match s {
            SmoothingArg::None => Smoothing::None,
            SmoothingArg::Linear => Smoothing::Linear,
        }
    }
}

/// Form file plus the almost-prime filter.
#[derive(Debug, Args, Serialize)]
pub struct Filter {
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub r: u32,
    #[arg(long, value_enum, default_value = "distinct")]
    pub mode: ModeArg,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SumsCmd {
    Partial(SumsPartial),
}

#[derive(Debug, Args, Serialize)]
pub struct SumsPartial {
    #[command(flatten)]
    pub filter: Filter,
    #[arg(long, value_parser = parse_number, default_value = "10^3")]
    pub xmin: f64,
    #[arg(long, value_parser = parse_number)]
    pub xmax: f64,
    /// Number of log-spaced sample points.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "none")]
    pub character: CharacterArg,
    #[arg(long, value_enum, default_value = "none")]
    pub smoothing: SmoothingArg,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum SignsCmd {
    Count(SignsCount),
    Primes(SignsPrimes),
}

#[derive(Debug, Args, Serialize)]
pub struct Intervals {
    /// Ratio `δ` of the geometric intervals `(X^{δ^t}, X^{δ^{t-1}}]`.
    #[arg(long, default_value_t = 0.9)]
    pub ratio: f64,
    /// Stop once the upper end of an interval drops below this value.
    #[arg(long, default_value_t = 2.0)]
    pub floor: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SignsCount {
    #[command(flatten)]
    pub filter: Filter,
    #[arg(long, value_parser = parse_number)]
    pub x: f64,
    #[command(flatten)]
    pub intervals: Intervals,
}

#[derive(Debug, Args, Serialize)]
pub struct SignsPrimes {
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, value_parser = parse_number)]
    pub x: f64,
    #[command(flatten)]
    pub intervals: Intervals,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum MomentCmd {
    Second(MomentSecond),
}

#[derive(Debug, Args, Serialize)]
pub struct MomentSecond {
    #[command(flatten)]
    pub filter: Filter,
    /// Comma-separated values of `Y`.
    #[arg(long, value_delimiter = ',', value_parser = parse_number, required = true)]
    pub y: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum GrowthCmd {
    Ramanujan(GrowthRamanujan),
}

#[derive(Debug, Args, Serialize)]
pub struct GrowthRamanujan {
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, value_parser = parse_number)]
    pub x: f64,
    #[arg(long, default_value_t = 40)]
    pub checkpoints: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    Gamma,
    Gaussian,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelOpts {
    #[arg(long, value_enum, default_value = "gamma")]
    pub kernel: KernelArg,
    /// Width of the Gaussian kernel.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum LvalueCmd {
    Central(LvalueCentral),
    Waldspurger(LvalueWaldspurger),
    Siegel(LvalueSiegel),
}

#[derive(Debug, Args, Serialize)]
pub struct LvalueCentral {
    /// Comma-separated fundamental discriminants (or 1).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub d: Vec<i64>,
    /// Truncation `T`; defaults to `30|D|` (at least 60).
    #[arg(long, value_parser = parse_count)]
    pub truncation: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub balance: f64,
    #[command(flatten)]
    pub kernel: KernelOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct LvalueWaldspurger {
    #[arg(long)]
    pub form: PathBuf,
    #[arg(long, value_parser = parse_count, default_value = "200")]
    pub dmax: usize,
    /// Exponent of `D` in the ratio `a_f(D)² D^p / L`.
    #[arg(long, default_value_t = 0.0)]
    pub d_power: f64,
    /// Values below this are left out of the ratio statistics.
    #[arg(long, default_value_t = 0.01)]
    pub min_l: f64,
    #[command(flatten)]
    pub kernel: KernelOpts,
}

#[derive(Debug, Args, Serialize)]
pub struct LvalueSiegel {
    #[arg(long, value_parser = parse_count, default_value = "200")]
    pub pmax: usize,
    #[command(flatten)]
    pub kernel: KernelOpts,
}
