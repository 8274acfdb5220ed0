use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tdcp::benchmarks::{BudgetChoice, PenaltyChoice};
use tdcp::learn::DecayShape;
use tdcp::AllDifferentStrength;

#[derive(Debug, Parser)]
#[command(name = "tdcp", version, about = "Stochastic constraint programs solved by TD(0) learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train R independent seeded runs and report the best plan.
    Train(Box<TrainArgs>),
    /// Evaluate a plan exactly or by Monte Carlo sampling.
    Eval(EvalArgs),
    /// Find the optimal first stage by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Write a benchmark model to a model file.
    Build(BuildArgs),
    /// Generate a random connected network file.
    GenNetwork(GenNetworkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Benchmark {
    Artificial,
    Disaster,
}

/// `1`, `2`, `3` (or `b1`..`b3`) pick a budget level of the network; any other
/// positive integer, or `=N`, is an explicit budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetArg(pub BudgetChoice);

impl FromStr for BudgetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(explicit) = lower.strip_prefix('=') {
            let b: i64 = explicit.parse().map_err(|_| format!("invalid budget `{s}`"))?;
            return Ok(BudgetArg(BudgetChoice::Explicit(b)));
        }
        let digits = lower.strip_prefix('b').unwrap_or(&lower);
        let value: i64 = digits.parse().map_err(|_| format!("invalid budget `{s}`: expected 1, 2, 3 or an amount"))?;
        Ok(BudgetArg(match value {
            1..=3 => BudgetChoice::Level(value as u8),
            _ => BudgetChoice::Explicit(value),
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyArg(pub PenaltyChoice);

impl FromStr for PenaltyArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(PenaltyArg(PenaltyChoice::Low)),
            "high" => Ok(PenaltyArg(PenaltyChoice::High)),
            other => other
                .parse::<f64>()
                .map(|m| PenaltyArg(PenaltyChoice::Explicit(m)))
                .map_err(|_| format!("invalid penalty `{s}`: expected low, high or a number")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model file to load.
    #[arg(long, conflicts_with = "benchmark", required_unless_present = "benchmark")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub benchmark: Option<Benchmark>,
    /// Size of the artificial problem.
    #[arg(long)]
    pub n: Option<usize>,
    /// Network file for the disaster benchmark.
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    pub budget: BudgetArg,
    #[arg(long, default_value = "low")]
    pub penalty: PenaltyArg,
    /// Exclude plans leaving an affordable link uninvested.
    #[arg(long)]
    pub maximal: bool,
    /// Shuffle the investment decision order with this seed.
    #[arg(long)]
    pub permute_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strength {
    Pairwise,
    Cascade,
}

impl From<Strength> for AllDifferentStrength {
    fn from(s: Strength) -> Self {
        match s {
            Strength::Pairwise => AllDifferentStrength::Pairwise,
            Strength::Cascade => AllDifferentStrength::Cascade,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Decay {
    Linear,
    Exponential,
}

impl From<Decay> for DecayShape {
    fn from(d: Decay) -> Self {
        match d {
            Decay::Linear => DecayShape::Linear,
            Decay::Exponential => DecayShape::Exponential,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Filtering strength of all-different constraints.
    #[arg(long, value_enum, default_value = "pairwise")]
    pub all_different: Strength,
    /// Shuffle the variable order within each stage.
    #[arg(long)]
    pub order_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalMode {
    /// Enumerate every scenario.
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Sample N scenarios.
    #[arg(long, value_name = "N")]
    pub mc: Option<usize>,
    /// Largest scenario count `--exact` will enumerate.
    #[arg(long, default_value_t = tdcp::eval::DEFAULT_SCENARIO_LIMIT)]
    pub scenario_limit: u128,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 100_000)]
    pub episodes: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon_start: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon_end: f64,
    /// Fraction of the episodes over which epsilon decays.
    #[arg(long, default_value_t = 0.8)]
    pub epsilon_decay: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub decay_shape: Decay,
    /// Reward per assignment; defaults to the objective bound + 1.
    #[arg(long)]
    pub k_reward: Option<f64>,
    /// Bound on |objective| used to validate K, if the model has none.
    #[arg(long)]
    pub objective_bound: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub hash_size: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: u32,
    /// Base seed; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Greedy rollouts per plan extraction and curve point.
    #[arg(long, default_value_t = 1000)]
    pub rollouts: usize,
    /// Number of evenly spaced curve points.
    #[arg(long, default_value_t = 10)]
    pub curve_points: u64,
    /// Explicit curve checkpoints (episode counts), overriding --curve-points.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
    /// Directory receiving one `episode,estimate` CSV per run.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// JSON report of every run.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Plan file for the best run.
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
    /// Directory receiving each run's value table.
    #[arg(long)]
    pub table_out: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalMode,
    /// Seed for Monte Carlo evaluation.
    #[arg(long, default_value_t = 0)]
    pub eval_seed: u64,
    /// Record wall times (makes reports differ between invocations).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Plan file as written by `train --plan-out`.
    #[arg(long)]
    pub plan: PathBuf,
    #[command(flatten)]
    pub eval: EvalMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = tdcp::eval::DEFAULT_ASSIGNMENT_LIMIT)]
    pub assignment_limit: u128,
    #[arg(long, default_value_t = tdcp::eval::DEFAULT_SCENARIO_LIMIT)]
    pub scenario_limit: u128,
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenNetworkArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub links: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_forms() {
        assert_eq!("2".parse::<BudgetArg>().unwrap().0, BudgetChoice::Level(2));
        assert_eq!("B3".parse::<BudgetArg>().unwrap().0, BudgetChoice::Level(3));
        assert_eq!("40".parse::<BudgetArg>().unwrap().0, BudgetChoice::Explicit(40));
        assert_eq!("=2".parse::<BudgetArg>().unwrap().0, BudgetChoice::Explicit(2));
        assert!("x".parse::<BudgetArg>().is_err());
    }

    #[test]
    fn penalty_forms() {
        assert_eq!("HIGH".parse::<PenaltyArg>().unwrap().0, PenaltyChoice::High);
        assert_eq!("12.5".parse::<PenaltyArg>().unwrap().0, PenaltyChoice::Explicit(12.5));
        assert!("medium".parse::<PenaltyArg>().is_err());
    }

    #[test]
    fn cli_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
