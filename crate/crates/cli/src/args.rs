//! Command-line and config-file schema. Every command struct doubles as the
//! JSON record accepted by `--config`; unknown keys are rejected.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "flowlab",
    version,
    about = "Regimes, exponents and simulations of isotropic Sobolev flows",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    /// JSON run configuration (`{"command": "...", ...}`) used instead of a subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Classify one parameter point.
    Classify(ClassifyArgs),
    /// Tabulate the regime over an (α, η) grid.
    PhaseDiagram(PhaseArgs),
    /// Monte-Carlo paths of the distance diffusion.
    SimulateDistance(SimDistanceArgs),
    /// Discrete Kraichnan pair advection on a periodic box.
    SimulatePair(SimPairArgs),
    /// Moments of the exact one-dimensional sign flow.
    SignDemo(SignDemoArgs),
    /// Chaos truncation error of the sign flow by order.
    ChaosDemo(ChaosDemoArgs),
    /// Oracle cross-checks of the special functions and constants.
    Selfcheck(SelfcheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::SimulateDistance(_) => "simulate-distance",
            Command::SimulatePair(_) => "simulate-pair",
            Command::SignDemo(_) => "sign-demo",
            Command::ChaosDemo(_) => "chaos-demo",
            Command::Selfcheck(_) => "selfcheck",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Sphere,
    Euclid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Squared,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitModeArg {
    Auto,
    Absorb,
    Record,
}

fn one() -> f64 {
    1.0
}

pub fn env_seed() -> u64 {
    std::env::var("FLOWLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1)
}

macro_rules! default_fn {
    ($name:ident, $t:ty, $v:expr) => {
        fn $name() -> $t {
            $v
        }
    };
}

default_fn!(alpha_lo, f64, 0.1);
default_fn!(alpha_hi, f64, 1.95);
default_fn!(eta_hi, f64, 1.0);
default_fn!(steps30, usize, 30);
default_fn!(margin, f64, 0.05);
default_fn!(dt_sim, f64, 1e-3);
default_fn!(paths_sim, usize, 1000);
default_fn!(hit_eps, f64, 1e-3);
default_fn!(scheme, SchemeArg, SchemeArg::Squared);
default_fn!(hit_mode, HitModeArg, HitModeArg::Auto);
default_fn!(d2, u32, 2);
default_fn!(half, f64, 0.5);
default_fn!(box_len, f64, 4.0 * std::f64::consts::PI);
default_fn!(k_max, f64, 8.0);
default_fn!(r0, f64, 0.3);
default_fn!(dt_pair, f64, 5e-3);
default_fn!(paths_pair, usize, 2000);
default_fn!(xs, Vec<f64>, vec![0.5]);
default_fn!(paths_sign, usize, 100_000);
default_fn!(dt_sign, f64, 1e-2);
default_fn!(paths_chaos, usize, 200);
default_fn!(orders, usize, 4);
default_fn!(x_max, f64, 8.0);
default_fn!(grid_n, usize, 512);

/// Flow parameters: `--eta` alone (with `a + b = 1`) or `--a` and `--b`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyArgs {
    #[arg(value_enum)]
    pub geometry: GeometryArg,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Mass (ℝ^d only).
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub m: f64,
    /// Also run the numeric scale/speed tests.
    #[arg(long)]
    #[serde(default)]
    pub numeric: bool,
    /// Indeterminacy band around the thresholds.
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub band: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseArgs {
    #[arg(value_enum)]
    pub geometry: GeometryArg,
    #[arg(long)]
    pub d: u32,
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "alpha_lo")]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 1.95)]
    #[serde(default = "alpha_hi")]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "eta_hi")]
    pub eta_max: f64,
    /// Grid points per axis (endpoints included).
    #[arg(long, default_value_t = 30)]
    #[serde(default = "steps30")]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub m: f64,
    /// Fraction of eligible points re-classified numerically.
    #[arg(long)]
    pub numeric_verify: Option<f64>,
    /// Minimum η-distance from the threshold curves for verification.
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "margin")]
    pub verify_margin: f64,
    #[arg(long, env = "FLOWLAB_SEED", default_value_t = 1)]
    #[serde(default = "env_seed")]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDistanceArgs {
    #[arg(value_enum)]
    pub geometry: GeometryArg,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub m: f64,
    /// Initial distance.
    #[arg(long)]
    pub phi0: f64,
    /// Time horizon.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "dt_sim")]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    #[serde(default = "paths_sim")]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "hit_eps")]
    pub hit_eps: f64,
    #[arg(long, value_enum, default_value = "squared")]
    #[serde(default = "scheme")]
    pub scheme: SchemeArg,
    /// `auto` absorbs in the coalescent regime and records otherwise.
    #[arg(long, value_enum, default_value = "auto")]
    #[serde(default = "hit_mode")]
    pub hit_mode: HitModeArg,
    #[arg(long, env = "FLOWLAB_SEED", default_value_t = 1)]
    #[serde(default = "env_seed")]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimPairArgs {
    #[arg(long, default_value_t = 2)]
    #[serde(default = "d2")]
    pub d: u32,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub alpha: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub m: f64,
    /// Box side.
    #[arg(long = "L", default_value_t = 4.0 * std::f64::consts::PI)]
    #[serde(rename = "L", default = "box_len")]
    pub box_length: f64,
    #[arg(long, default_value_t = 8.0)]
    #[serde(default = "k_max")]
    pub k_max: f64,
    /// Initial separation along the first axis.
    #[arg(long, default_value_t = 0.3)]
    #[serde(default = "r0")]
    pub r0: f64,
    #[arg(long, default_value_t = 5e-3)]
    #[serde(default = "dt_pair")]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 0.5)]
    #[serde(rename = "T", default = "half")]
    pub t: f64,
    #[arg(long, default_value_t = 2000)]
    #[serde(default = "paths_pair")]
    pub paths: usize,
    #[arg(long, env = "FLOWLAB_SEED", default_value_t = 1)]
    #[serde(default = "env_seed")]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignDemoArgs {
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub t: f64,
    /// Evaluation points (repeat or comma-separate).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5], allow_negative_numbers = true)]
    #[serde(default = "xs")]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    #[serde(default = "paths_sign")]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-2)]
    #[serde(default = "dt_sign")]
    pub dt: f64,
    /// Centre `c` of the test function `exp(−(x − c)²)`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    #[serde(default)]
    pub shift: f64,
    #[arg(long, env = "FLOWLAB_SEED", default_value_t = 1)]
    #[serde(default = "env_seed")]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosDemoArgs {
    #[arg(long, default_value_t = 0.5)]
    #[serde(default = "half")]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "dt_sim")]
    pub dt: f64,
    #[arg(long, default_value_t = 200)]
    #[serde(default = "paths_chaos")]
    pub paths: usize,
    /// Highest chaos order.
    #[arg(long, default_value_t = 4)]
    #[serde(default = "orders")]
    pub orders: usize,
    #[arg(long, default_value_t = 8.0)]
    #[serde(default = "x_max")]
    pub x_max: f64,
    #[arg(long, default_value_t = 512)]
    #[serde(default = "grid_n")]
    pub grid: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    #[serde(default)]
    pub shift: f64,
    #[arg(long, env = "FLOWLAB_SEED", default_value_t = 1)]
    #[serde(default = "env_seed")]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfcheckArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
