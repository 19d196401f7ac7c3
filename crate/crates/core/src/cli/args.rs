use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Shrinking targets on Przytycki–Urbański fractals.
#[derive(Debug, Parser)]
#[command(name = "putargets", version)]
pub struct Cli {
    /// JSON config (flat keys) or a run manifest; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Output directory (overridden by `OUTPUT_DIR`).
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// RNG seed; runs are fully deterministic, default 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PGM raster of the attractor, or of the preimage union at time n.
    Render(RenderArgs),
    /// Box dimension of the attractor.
    DimF(DimFArgs),
    /// Shrinking-target covers, probes and energies.
    #[command(subcommand)]
    Targets(TargetsCommand),
    /// Bernoulli convolution: histogram and branch counters.
    #[command(subcommand)]
    Bc(BcCommand),
    /// Exponential separation.
    #[command(subcommand)]
    Sep(SepCommand),
    /// Transversality diagnostics.
    #[command(subcommand)]
    Trans(TransCommand),
    /// Closed-form dimension values and the t(γ) identity check.
    Formulas(FormulaArgs),
}

#[derive(Debug, Subcommand)]
pub enum TargetsCommand {
    /// Counts for the three covering strategies.
    Cover(CoverArgs),
    /// Local-dimension probes of the Cantor measure.
    Probe(MeasureArgs),
    /// Energy trend of the Cantor measure across depths.
    Energy(EnergyArgs),
    /// Membership of a coding in the cylinder target at time n.
    Dynamical(DynamicalArgs),
}

#[derive(Debug, Subcommand)]
pub enum BcCommand {
    /// Dyadic histogram of the Bernoulli convolution.
    Hist(HistArgs),
    /// Branch count N_k(x, ρ).
    Nk(NkArgs),
    /// Number of length-k expansion prefixes of x.
    Expansions(ExpansionArgs),
}

#[derive(Debug, Subcommand)]
pub enum SepCommand {
    /// Minimum of |P(λ)| over {0, ±1} polynomials of degree n.
    Scan(SepScanArgs),
    /// Minima for every degree up to n_max.
    Profile(SepProfileArgs),
}

#[derive(Debug, Subcommand)]
pub enum TransCommand {
    /// Measure of {λ : |g(λ)| < ρ} for the difference of two codings.
    Measure(TransMeasureArgs),
    /// Random power series searched for double zeros.
    Doublezero(DoubleZeroArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CentreArgs {
    /// Centre coding as 0/1 digits, repeated periodically; random when absent.
    #[arg(long)]
    pub z: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScheduleArgs {
    /// Measure case 1, 2 or 3 (default from the regime).
    #[arg(long)]
    pub case: Option<u8>,
    /// First return time.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Growth factor c of the return rule.
    #[arg(long)]
    pub growth: Option<usize>,
    /// Number of returns M.
    #[arg(long)]
    pub returns: Option<usize>,
    /// Explicit return times, overriding n1/returns.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub centre: CentreArgs,
    /// Cylinder depth of the attractor approximation.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Raster side in pixels (a power of two).
    #[arg(long)]
    pub px: Option<usize>,
    /// Render the preimage union at this time instead of the attractor.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct DimFArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub r_lo: Option<u32>,
    #[arg(long)]
    pub r_hi: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub centre: CentreArgs,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub centre: CentreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Number of sampled points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub r_lo: Option<u32>,
    #[arg(long)]
    pub r_hi: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnergyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub centre: CentreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub schedule: ScheduleArgs,
    /// Exponents (default: the case's dimension ± 0.1).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Base depth d; the trend uses d, 2d, 4d unless `depths` is given.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    /// `stratified` or `pairs`.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct DynamicalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub centre: CentreArgs,
    #[arg(long)]
    pub n: Option<usize>,
    /// Coding to test; random when absent.
    #[arg(long)]
    pub i: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct HistArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct NkArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpansionArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SepScanArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SepProfileArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct TransMeasureArgs {
    /// First coding (0/1 digits).
    #[arg(long)]
    pub i: Option<String>,
    /// Second coding (0/1 digits).
    #[arg(long)]
    pub j: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Series degree.
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct DoubleZeroArgs {
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct FormulaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
}

impl Command {
    /// Command name and its flags as a JSON object.
    pub fn flags(&self) -> (&'static str, serde_json::Value) {
        use serde_json::to_value as v;
        let r = match self {
            Command::Render(a) => ("render", v(a)),
            Command::DimF(a) => ("dim-f", v(a)),
            Command::Targets(TargetsCommand::Cover(a)) => ("targets cover", v(a)),
            Command::Targets(TargetsCommand::Probe(a)) => ("targets probe", v(a)),
            Command::Targets(TargetsCommand::Energy(a)) => ("targets energy", v(a)),
            Command::Targets(TargetsCommand::Dynamical(a)) => ("targets dynamical", v(a)),
            Command::Bc(BcCommand::Hist(a)) => ("bc hist", v(a)),
            Command::Bc(BcCommand::Nk(a)) => ("bc nk", v(a)),
            Command::Bc(BcCommand::Expansions(a)) => ("bc expansions", v(a)),
            Command::Sep(SepCommand::Scan(a)) => ("sep scan", v(a)),
            Command::Sep(SepCommand::Profile(a)) => ("sep profile", v(a)),
            Command::Trans(TransCommand::Measure(a)) => ("trans measure", v(a)),
            Command::Trans(TransCommand::Doublezero(a)) => ("trans doublezero", v(a)),
            Command::Formulas(a) => ("formulas", v(a)),
        };
        (r.0, r.1.expect("flag structs serialise"))
    }
}
