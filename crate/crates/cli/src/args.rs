use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Simulates multimode bunching of partially distinguishable photons and
/// regenerates the result tables.
#[derive(Debug, Parser)]
#[command(name = "bunching", version)]
pub struct Cli {
    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true, env = "BUNCHING_THREADS")]
    pub threads: Option<usize>,

    /// Print a single JSON report on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write a reproduction manifest (argv, parameters, output checksums) to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check perm(A.A^T)/perm(A) = 1237/1152 for Drury's matrix.
    DruryCheck(DruryArgs),
    /// Violation ratio R_n and its lower bound over a range of n.
    Ratio(RatioArgs),
    /// Two-mode photon-number distribution of the n-mode family.
    Distribution(DistributionArgs),
    /// Mean violation ratio under random state or network perturbations.
    Perturb(PerturbArgs),
    /// Random search for bunching violations over Haar networks.
    Search(SearchArgs),
    /// Bunching ratio over the (x, y) simplex of mixed inputs.
    Ternary(TernaryArgs),
    /// First-order stability of bunching around indistinguishable inputs.
    Stability(StabilityArgs),
    /// Re-run a manifest and compare output checksums.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct DruryArgs {
    /// Use the permutation-sum permanent instead of Ryser's formula.
    #[arg(long)]
    pub naive_oracle: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,

    #[arg(long, default_value_t = 14)]
    pub n_max: usize,

    /// Beam-splitter transmittance; 2/n when absent.
    #[arg(long)]
    pub eta: Option<f64>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Input {
    Star,
    Bos,
    Dist,
}

#[derive(Debug, Args, Serialize)]
pub struct DistributionArgs {
    #[arg(long, default_value_t = 7)]
    pub n: usize,

    #[arg(long, value_enum)]
    pub input: Input,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    States,
    Unitary,
}

/// `start:stop:step`, inclusive of `stop`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsGrid(pub Vec<f64>);

impl FromStr for EpsGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got {s:?}"));
        };
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
        if !(a.is_finite() && b.is_finite() && step.is_finite()) || a < 0.0 || b < a || step <= 0.0 {
            return Err(format!("need 0 <= start <= stop and step > 0, got {s:?}"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        if count > 100_000 {
            return Err(format!("grid {s:?} has more than 100000 points"));
        }
        Ok(EpsGrid((0..=count).map(|i| a + i as f64 * step).collect()))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PerturbArgs {
    #[arg(long, value_enum)]
    pub target: Target,

    /// Noise strengths as start:stop:step.
    #[arg(long, default_value = "0:0.2:0.02")]
    pub eps_grid: EpsGrid,

    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 7)]
    pub n: usize,

    #[arg(long, default_value_t = 2)]
    pub rank: usize,

    /// Number of monitored output modes; defaults to the rank.
    #[arg(long)]
    pub subset_size: Option<usize>,

    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Append the embedded Drury instance; the run fails unless exactly it is flagged.
    #[arg(long)]
    pub plant_drury: bool,

    /// Output file for the JSON summary; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TernaryArgs {
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = 7)]
    pub n: usize,

    #[arg(long, default_value_t = 100)]
    pub trials: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier `--manifest` run.
    pub manifest_file: PathBuf,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DruryCheck(_) => "drury-check",
            Command::Ratio(_) => "ratio",
            Command::Distribution(_) => "distribution",
            Command::Perturb(_) => "perturb",
            Command::Search(_) => "search",
            Command::Ternary(_) => "ternary",
            Command::Stability(_) => "stability",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Perturb(a) => Some(a.seed),
            Command::Search(a) => Some(a.seed),
            Command::Stability(a) => Some(a.seed),
            _ => None,
        }
    }
}
