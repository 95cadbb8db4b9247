mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use martingale::montecarlo::{Parallelism, DEFAULT_SEED};
use martingale::{parse_rational, Rational};

use report::Format;

const COLUMNS_HELP: &str = "\
CSV columns (after the '# key=value' header lines):
  condexp              outcome,label,prob,x,y,block
  classify             time,block,outcomes,defect
  upcross (path)       band_lower,band_upper,n,value,indicator,running_integral,running_count
  upcross (fuzz)       path,family,band_lower,band_upper,count,lhs,rhs,slack,corrected_rhs,corrected_slack
  gw simulate          trial,n,z
  gw extinction        n,iterate
  gw regime            regime,mean,variance,degenerate,q,converged,iterations
  gw ui-demo           n,mean,standard_error,survival,exact_survival
  gw defect-check      n,survivors,ratio_mean,ratio_se,ratio_ok,increment_mean,increment_se,increment_ok

Exit codes: 0 all checks passed, 1 a requested check failed, 2 invalid input,
3 an inequality that must hold on every path was violated.";

#[derive(Debug, Parser)]
#[command(
    name = "martingale",
    version,
    about = "Martingales on finite spaces, upcrossings and Galton–Watson experiments"
)]
#[command(after_help = COLUMNS_HELP)]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, env = "MARTINGALE_SEED")]
    pub seed: Option<u64>,
    /// Number of Monte Carlo trials or fuzzed paths.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Number of time steps or generations.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Band `a:b` with a < b; repeatable. Exact rationals such as `1/2` are accepted.
    #[arg(long = "band", global = true, value_parser = parse_band, allow_hyphen_values = true)]
    pub bands: Vec<(Rational, Rational)>,
    /// Comparison tolerance (0 means exact).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Offspring law file, JSON or TOML: `{"p": [p0, p1, ...]}`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for ensembles (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn parallelism(&self) -> Parallelism {
        match self.threads {
            Some(0) => Parallelism::Sequential,
            Some(n) => Parallelism::Threads(n),
            None => Parallelism::Global,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional expectation of X given a partition, with the defining-property check.
    Condexp(CondexpArgs),
    /// Martingale / super / sub classification with the one-step defect table.
    Classify(ClassifyArgs),
    /// Crossing times, predictable indicator and the pathwise upcrossing inequality.
    Upcross(UpcrossArgs),
    /// Galton–Watson experiments.
    Gw(GwArgs),
}

#[derive(Debug, Args)]
pub struct CondexpArgs {
    /// Space JSON: {"probs": [...], "partitions": [...]}.
    #[arg(long)]
    pub space: PathBuf,
    /// Values of X: [...] or {"values": [...]}.
    #[arg(long)]
    pub x: PathBuf,
    /// Partition JSON: [[...], ...] or {"blocks": [...]}.
    #[arg(long, conflicts_with = "partition_index")]
    pub partition: Option<PathBuf>,
    /// Use the partition with this index from the space file instead.
    #[arg(long)]
    pub partition_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Martingale,
    Supermartingale,
    Submartingale,
    None,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).args(["process", "tree"])))]
pub struct ClassifyArgs {
    /// Process JSON: {"filtration": {...}, "values": [[...], ...]}.
    #[arg(long)]
    pub process: Option<PathBuf>,
    /// Binary-tree walk `depth:up_prob:step_up:step_down`, e.g. `3:1/2:1:-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub tree: Option<String>,
    /// Exit with status 1 unless the classification matches.
    #[arg(long, value_enum)]
    pub expect: Option<Kind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    /// `(b−a)U ≤ S_N + (X_0−a)⁻ − (X_N−a)⁻`
    Literal,
    /// `(b−a)U ≤ S_N − (X_0−a)⁻ + (X_N−a)⁻`
    Corrected,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Literal => "literal",
            Form::Corrected => "corrected",
        }
    }
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("input").required(true).args(["path", "values", "fuzz"])))]
pub struct UpcrossArgs {
    /// Path JSON: [...] or {"values": [...]}.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Inline path, e.g. `0,2,0,2`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Check randomly generated paths (walks, noise, monotone, alternating).
    #[arg(long)]
    pub fuzz: bool,
    /// Which form of the inequality decides the exit status.
    #[arg(long, value_enum, default_value_t = Form::Literal)]
    pub form: Form,
}

#[derive(Debug, Args)]
pub struct GwArgs {
    /// Inline offspring law, e.g. `1/4,0,3/4` (instead of --config).
    #[arg(long, global = true)]
    pub p: Option<String>,
    /// Population cap per trajectory.
    #[arg(long, global = true)]
    pub pop_cap: Option<u64>,
    #[command(subcommand)]
    pub command: GwCommand,
}

#[derive(Debug, Subcommand)]
pub enum GwCommand {
    /// Simulate trajectories.
    Simulate,
    /// Extinction probability by generating-function iteration, plus a Monte Carlo estimate.
    Extinction,
    /// Sub-, super- or critical regime.
    Regime,
    /// Critical branching: mean stays 1 while extinction takes over.
    UiDemo {
        /// Survival fraction the final generation must fall below.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Monte Carlo and exact checks of the mean recursion.
    DefectCheck,
}

fn parse_band(text: &str) -> Result<(Rational, Rational), String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("expected a:b, got {text:?}"))?;
    let a = parse_rational(a).ok_or_else(|| format!("bad lower edge {a:?}"))?;
    let b = parse_rational(b).ok_or_else(|| format!("bad upper edge {b:?}"))?;
    if a >= b {
        return Err(format!("band needs a < b, got {a}:{b}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli).and_then(|r| r.emit(cli.format, cli.out.as_ref()).map(|_| r.status)) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
