//! Plan evaluation: exact scenario enumeration, Monte Carlo sampling and
//! exhaustive search for an optimal first stage on small instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cp::{ConstraintSpec, SolverFingerprint, VarId};
use crate::error::{Error, Result};
use crate::model::{Model, Pmf};

pub const DEFAULT_SCENARIO_LIMIT: u128 = 1 << 20;
pub const DEFAULT_ASSIGNMENT_LIMIT: u128 = 1_000_000;

/// A complete first-stage decision assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub decisions: Vec<(VarId, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

impl Plan {
    pub fn new(mut decisions: Vec<(VarId, i64)>) -> Self {
        decisions.sort();
        Plan { decisions, estimated: None, exact: None }
    }

    pub fn value_of(&self, var: VarId) -> Option<i64> {
        self.decisions.iter().find(|(v, _)| *v == var).map(|&(_, x)| x)
    }

    pub fn values(&self) -> Vec<i64> {
        self.decisions.iter().map(|&(_, x)| x).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut plan: Plan = serde_json::from_str(text)?;
        plan.decisions.sort();
        Ok(plan)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactEval {
    pub value: f64,
    pub scenarios: u128,
    /// Total probability mass enumerated; 1 up to rounding.
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEval {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub plan: Plan,
    pub value: f64,
    pub feasible_plans: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub assignments: u128,
    pub scenarios: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { assignments: DEFAULT_ASSIGNMENT_LIMIT, scenarios: DEFAULT_SCENARIO_LIMIT }
    }
}

pub(crate) fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Checks that `plan` assigns exactly the first-stage decisions, within their
/// domains, and satisfies every hard constraint over decisions only.
pub fn check_plan(model: &Model, plan: &Plan) -> Result<Vec<Option<i64>>> {
    let first = model.first_stage_decisions();
    if model.decision_vars().len() != first.len() {
        return Err(Error::Unsupported("plans can only be evaluated when every decision is in the first stage".into()));
    }
    let mut values = vec![None; model.num_vars()];
    for &(var, value) in &plan.decisions {
        if var.index() >= model.num_vars() || model.var_id(var.index()) != var || var.is_random() {
            return Err(Error::Plan(format!("{var} is not a decision variable of the model")));
        }
        if values[var.index()].replace(value).is_some() {
            return Err(Error::Plan(format!("{var} is assigned twice")));
        }
        if !model.domain(var).contains(value) {
            return Err(Error::ValueNotInDomain { var, value });
        }
    }
    if let Some(&missing) = first.iter().find(|v| values[v.index()].is_none()) {
        return Err(Error::Plan(format!("{missing} (`{}`) is not assigned", model.variable(missing).name)));
    }
    for (index, c) in model.constraints.iter().enumerate() {
        if matches!(c, ConstraintSpec::ShortestPathCost(_)) || c.vars().iter().any(|v| v.is_random()) {
            continue;
        }
        if c.holds(&values) == Some(false) {
            return Err(Error::InfeasiblePlan { index, description: c.describe() });
        }
    }
    Ok(values)
}

/// Per-random-variable distributions under the plan's decisions, in
/// declaration order. They depend only on first-stage decisions.
fn resolved(model: &Model, values: &[Option<i64>]) -> Result<Vec<(VarId, Pmf)>> {
    model.random_vars().into_iter().map(|v| Ok((v, model.resolve_pmf(v, values)?.clone()))).collect()
}

/// Expected objective of `plan` by enumerating every scenario, ordered
/// lexicographically over the random variables in declaration order.
pub fn exact_eval(model: &Model, plan: &Plan, scenario_limit: u128) -> Result<ExactEval> {
    let mut values = check_plan(model, plan)?;
    let scenarios = model.scenario_count();
    if scenarios > scenario_limit {
        return Err(Error::TooManyScenarios { scenarios, limit: scenario_limit });
    }
    let pmfs = resolved(model, &values)?;
    let engine = model.engine(&SolverFingerprint::default());
    let mut scratch = Vec::new();
    let mut value = 0.0;
    let mut mass = 0.0;

    // Odometer over the support of each distribution, full domain order.
    let supports: Vec<Vec<(i64, f64)>> =
        pmfs.iter().map(|(v, pmf)| model.domain(*v).values().iter().map(|&x| (x, pmf.probability(x))).collect()).collect();
    let n = supports.len();
    let mut digits = vec![0usize; n];
    loop {
        let mut p = 1.0;
        for (i, (var, _)) in pmfs.iter().enumerate() {
            let (x, px) = supports[i][digits[i]];
            values[var.index()] = Some(x);
            p *= px;
        }
        mass += p;
        if p > 0.0 {
            let outputs = engine.compute_outputs(&values, &mut scratch);
            value += p * model.objective.sample(&values, &outputs)?;
        }
        // advance, last variable fastest
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(ExactEval { value, scenarios, mass });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < supports[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Mean and standard error of the objective over `samples` scenarios drawn
/// independently under the plan.
pub fn mc_eval(model: &Model, plan: &Plan, samples: usize, seed: u64) -> Result<McEval> {
    if samples < 2 {
        return Err(Error::Plan("Monte Carlo evaluation needs at least two samples".into()));
    }
    let mut values = check_plan(model, plan)?;
    let pmfs = resolved(model, &values)?;
    let engine = model.engine(&SolverFingerprint::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = Vec::new();
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        for (var, pmf) in &pmfs {
            values[var.index()] = Some(pmf.sample(&mut rng));
        }
        let outputs = engine.compute_outputs(&values, &mut scratch);
        draws.push(model.objective.sample(&values, &outputs)?);
    }
    let (mean, stderr) = mean_stderr(&draws);
    Ok(McEval { mean, stderr, samples })
}

/// Exact objective of a permutation `d` of `1..=n` on the artificial family:
/// `sum_i (n - i) * (n - d_i + 1) / n`.
pub fn closed_form_artificial(n: usize, d: &[i64]) -> Result<f64> {
    let mut sorted = d.to_vec();
    sorted.sort_unstable();
    if d.len() != n || sorted.iter().zip(1..).any(|(&x, i)| x != i) {
        return Err(Error::Plan(format!("{d:?} is not a permutation of 1..={n}")));
    }
    let nf = n as f64;
    Ok(d.iter().enumerate().map(|(i, &di)| (nf - (i as f64 + 1.0)) * (nf - di as f64 + 1.0) / nf).sum())
}

/// Enumerates every feasible first-stage assignment, evaluates each exactly
/// and returns the best; ties go to the lexicographically first assignment.
pub fn exhaustive_opt(model: &Model, limits: Limits) -> Result<OracleResult> {
    let first = model.first_stage_decisions();
    let assignments = first.iter().fold(1u128, |n, &v| n.saturating_mul(model.domain(v).len() as u128));
    if assignments > limits.assignments {
        return Err(Error::TooManyAssignments { assignments, limit: limits.assignments });
    }
    let scenarios = model.scenario_count();
    if scenarios > limits.scenarios {
        return Err(Error::TooManyScenarios { scenarios, limit: limits.scenarios });
    }

    let domains: Vec<&[i64]> = first.iter().map(|&v| model.domain(v).values()).collect();
    let mut feasible = Vec::new();
    let mut digits = vec![0usize; first.len()];
    'outer: loop {
        let plan = Plan::new(first.iter().zip(&digits).enumerate().map(|(i, (&v, &d))| (v, domains[i][d])).collect());
        if check_plan(model, &plan).is_ok() {
            feasible.push(plan);
        }
        let mut i = digits.len();
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < domains[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
    if feasible.is_empty() {
        return Err(Error::Plan("no first-stage assignment satisfies the hard constraints".into()));
    }
    let values: Vec<f64> = feasible.par_iter().map(|p| exact_eval(model, p, limits.scenarios).map(|e| e.value)).collect::<Result<_>>()?;
    let sense = model.objective.sense;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if sense.better(v, values[best]) && (v - values[best]).abs() > 1e-12 * v.abs().max(1.0) {
            best = i;
        }
    }
    let value = values[best];
    let mut plan = feasible.swap_remove(best);
    plan.exact = Some(value);
    Ok(OracleResult { plan, value, feasible_plans: values.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((closed_form_artificial(2, &[1, 2]).unwrap() - 1.0).abs() < 1e-15);
        assert!((closed_form_artificial(3, &[1, 2, 3]).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!((closed_form_artificial(3, &[3, 2, 1]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(closed_form_artificial(3, &[1, 1, 3]).is_err());
        assert!(closed_form_artificial(3, &[1, 2]).is_err());
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
    }
}
