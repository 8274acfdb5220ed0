//! Serialized reports. Everything here is deterministic given the flags and
//! seeds, except wall times, which are only filled in on request.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use tdcp::benchmarks::invested_links;
use tdcp::learn::{CurvePoint, EpsilonSchedule, Seeds};
use tdcp::{Model, Plan, SolverFingerprint};

#[derive(Debug, Clone, Serialize)]
pub struct FingerprintEcho {
    pub all_different: tdcp::AllDifferentStrength,
    pub order_seed: Option<u64>,
    pub version: String,
    pub digest: String,
}

impl From<&SolverFingerprint> for FingerprintEcho {
    fn from(fp: &SolverFingerprint) -> Self {
        FingerprintEcho { all_different: fp.all_different, order_seed: fp.order_seed, version: fp.version.clone(), digest: fp.digest_hex() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub episodes: u64,
    pub alpha: f64,
    pub epsilon: EpsilonSchedule,
    pub k_reward: f64,
    pub hash_size: usize,
    pub eval_rollouts: usize,
    pub checkpoints: Vec<u64>,
    pub base_seed: u64,
    pub runs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub var: String,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Evaluation {
    Exact { value: f64, scenarios: u128 },
    Mc { value: f64, stderr: f64, samples: usize, seed: u64 },
}

impl Evaluation {
    pub fn value(&self) -> f64 {
        match *self {
            Evaluation::Exact { value, .. } | Evaluation::Mc { value, .. } => value,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Evaluation::Exact { value, scenarios } => format!("{value:.6} (exact over {scenarios} scenarios)"),
            Evaluation::Mc { value, stderr, samples, .. } => format!("{value:.6} +- {stderr:.6} (Monte Carlo, {samples} samples)"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub run: u32,
    pub seeds: Seeds,
    pub plan: Option<Vec<Assignment>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invested_links: Option<Vec<u32>>,
    pub estimated: Option<f64>,
    pub estimate_stderr: Option<f64>,
    pub completed_rollouts: Option<usize>,
    pub evaluation: Option<Evaluation>,
    pub truncated_episodes: u64,
    pub truncation_rate: f64,
    pub curve: Vec<CurvePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub model: String,
    pub source: String,
    pub sense: tdcp::Sense,
    pub fingerprint: FingerprintEcho,
    pub config: ConfigEcho,
    pub best_run: Option<u32>,
    pub runs: Vec<RunReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub model: String,
    pub source: String,
    pub plan: Vec<Assignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invested_links: Option<Vec<u32>>,
    pub evaluation: Evaluation,
}

pub fn assignments(model: &Model, plan: &Plan) -> Vec<Assignment> {
    plan.decisions.iter().map(|&(v, value)| Assignment { var: model.variable(v).name.clone(), value }).collect()
}

/// Disaster-style models name their binary investment decisions `y_<id>`.
pub fn is_investment_model(model: &Model) -> bool {
    let decisions = model.first_stage_decisions();
    !decisions.is_empty()
        && decisions.iter().all(|&v| {
            let var = model.variable(v);
            var.domain.values() == [0, 1] && var.name.strip_prefix("y_").is_some_and(|id| id.parse::<u32>().is_ok())
        })
}

pub fn links_of(model: &Model, plan: &Plan) -> Option<Vec<u32>> {
    is_investment_model(model).then(|| invested_links(model, plan))
}

pub fn describe_plan(model: &Model, plan: &Plan) -> String {
    if let Some(ids) = links_of(model, plan) {
        let ids: Vec<String> = ids.iter().map(u32::to_string).collect();
        return format!("invest {{{}}}", ids.join(", "));
    }
    let mut s = String::new();
    for a in assignments(model, plan) {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{}={}", a.var, a.value);
    }
    s
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["episode", "estimate"])?;
    for p in curve {
        let estimate = p.estimate.map(|e| e.to_string()).unwrap_or_default();
        w.write_record([p.episode.to_string(), estimate])?;
    }
    w.flush()?;
    Ok(())
}

/// The Table-2-style summary printed after training.
pub fn train_table(report: &TrainReport, best: Option<(&Model, &Plan)>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}), {} runs x {} episodes", report.model, report.source, report.config.runs, report.config.episodes);
    let _ = writeln!(out, "{:>4}  {:>14}  {:>30}  {:>9}", "run", "estimated", "evaluated", "truncated");
    for r in &report.runs {
        let est = r.estimated.map_or("-".to_owned(), |e| format!("{e:.6}"));
        let eval = match &r.evaluation {
            Some(Evaluation::Exact { value, .. }) => format!("{value:.6}"),
            Some(Evaluation::Mc { value, stderr, .. }) => format!("{value:.6} +- {stderr:.6}"),
            None => "-".to_owned(),
        };
        let _ = writeln!(out, "{:>4}  {:>14}  {:>30}  {:>8.2}%", r.run, est, eval, 100.0 * r.truncation_rate);
        if let Some(e) = &r.error {
            let _ = writeln!(out, "      error: {e}");
        }
    }
    match (report.best_run, best) {
        (Some(run), Some((model, plan))) => {
            let r = &report.runs[run as usize];
            let _ = writeln!(out, "best run {run}: {}", describe_plan(model, plan));
            let _ = writeln!(out, "  estimated {:.6}", r.estimated.unwrap_or(f64::NAN));
            if let Some(e) = &r.evaluation {
                let _ = writeln!(out, "  evaluated {}", e.describe());
            }
        }
        _ => {
            let _ = writeln!(out, "no run produced a plan");
        }
    }
    out
}
