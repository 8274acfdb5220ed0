use serde::{Deserialize, Serialize};

use super::domain::{VarId, VarKind};
use crate::error::{Error, Result};
use crate::network::RecourseGraph;

/// Shortest-path recourse: once every link survival variable is assigned, the
/// named output receives the total OD path cost (penalty per disconnected pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortestPathSpec {
    pub penalty: f64,
    pub graph: RecourseGraph,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintSpec {
    AllDifferent {
        vars: Vec<VarId>,
    },
    /// `sum(coeffs[i] * vars[i]) <= bound`
    LinearLe {
        coeffs: Vec<i64>,
        vars: Vec<VarId>,
        bound: i64,
    },
    /// `lhs <= rhs`; mostly used as a reified term of an objective.
    ReifiedLe {
        lhs: VarId,
        rhs: VarId,
    },
    /// Over binary `vars`: for every `e`, `vars[e] = 1` or
    /// `sum(costs[j] * vars[j]) + costs[e] > budget`.
    MaximalityGuard {
        costs: Vec<i64>,
        vars: Vec<VarId>,
        budget: i64,
    },
    ShortestPathCost(ShortestPathSpec),
}

impl ConstraintSpec {
    /// Every finite-domain variable the constraint reads.
    pub fn vars(&self) -> Vec<VarId> {
        match self {
            ConstraintSpec::AllDifferent { vars }
            | ConstraintSpec::LinearLe { vars, .. }
            | ConstraintSpec::MaximalityGuard { vars, .. } => vars.clone(),
            ConstraintSpec::ReifiedLe { lhs, rhs } => vec![*lhs, *rhs],
            ConstraintSpec::ShortestPathCost(spec) => spec.graph.links.iter().map(|l| l.survival).collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstraintSpec::AllDifferent { .. } => "all_different",
            ConstraintSpec::LinearLe { .. } => "linear_le",
            ConstraintSpec::ReifiedLe { .. } => "reified_le",
            ConstraintSpec::MaximalityGuard { .. } => "maximality_guard",
            ConstraintSpec::ShortestPathCost(_) => "shortest_path_cost",
        }
    }

    /// Structural checks against the declared variable kinds.
    pub(crate) fn validate(&self, kinds: &[VarKind]) -> Result<()> {
        let vars = self.vars();
        for v in &vars {
            match kinds.get(v.index()) {
                Some(&k) if k == v.kind() => {}
                Some(_) => return Err(Error::Model(format!("{}: {v} has the wrong kind", self.name()))),
                None => return Err(Error::Model(format!("{}: {v} is not declared", self.name()))),
            }
        }
        match self {
            ConstraintSpec::LinearLe { coeffs, vars, .. } | ConstraintSpec::MaximalityGuard { costs: coeffs, vars, .. } => {
                if coeffs.len() != vars.len() {
                    return Err(Error::Model(format!("{}: {} coefficients for {} variables", self.name(), coeffs.len(), vars.len())));
                }
            }
            ConstraintSpec::ShortestPathCost(spec) => {
                spec.graph.validate()?;
                if spec.graph.links.iter().any(|l| !l.survival.is_random()) {
                    return Err(Error::Model("shortest_path_cost: link survival must be random".into()));
                }
                if !(spec.penalty.is_finite() && spec.penalty >= 0.0) {
                    return Err(Error::Model(format!("shortest_path_cost: bad penalty {}", spec.penalty)));
                }
                // The output is the computed second-stage decision.
                return Ok(());
            }
            _ => {}
        }
        if let ConstraintSpec::MaximalityGuard { costs, .. } = self {
            if costs.iter().any(|&c| c < 0) {
                return Err(Error::Model("maximality_guard: costs must be non-negative".into()));
            }
        }
        if !vars.iter().any(|v| v.kind() == VarKind::Decision) {
            return Err(Error::Model(format!("{} must reference at least one decision variable", self.name())));
        }
        Ok(())
    }

    /// Truth value under the given values, or `None` while a referenced
    /// variable is unassigned. Shortest-path constraints always hold.
    pub fn holds(&self, values: &[Option<i64>]) -> Option<bool> {
        let get = |v: &VarId| values.get(v.index()).copied().flatten();
        match self {
            ConstraintSpec::AllDifferent { vars } => {
                let mut seen = Vec::with_capacity(vars.len());
                for v in vars {
                    seen.push(get(v)?);
                }
                seen.sort_unstable();
                Some(seen.windows(2).all(|w| w[0] != w[1]))
            }
            ConstraintSpec::LinearLe { coeffs, vars, bound } => {
                let mut sum = 0i64;
                for (c, v) in coeffs.iter().zip(vars) {
                    sum += c * get(v)?;
                }
                Some(sum <= *bound)
            }
            ConstraintSpec::ReifiedLe { lhs, rhs } => Some(get(lhs)? <= get(rhs)?),
            ConstraintSpec::MaximalityGuard { costs, vars, budget } => {
                let mut assigned = Vec::with_capacity(vars.len());
                for v in vars {
                    assigned.push(get(v)?);
                }
                let spent: i64 = costs.iter().zip(&assigned).map(|(c, y)| c * y).sum();
                Some(costs.iter().zip(&assigned).all(|(c, &y)| y == 1 || spent + c > *budget))
            }
            ConstraintSpec::ShortestPathCost(_) => Some(true),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ConstraintSpec::AllDifferent { vars } => format!("all_different over {} variables", vars.len()),
            ConstraintSpec::LinearLe { vars, bound, .. } => format!("linear_le over {} variables <= {bound}", vars.len()),
            ConstraintSpec::ReifiedLe { lhs, rhs } => format!("reified_le {lhs} <= {rhs}"),
            ConstraintSpec::MaximalityGuard { budget, .. } => format!("maximality_guard under budget {budget}"),
            ConstraintSpec::ShortestPathCost(spec) => format!("shortest_path_cost into `{}`", spec.output),
        }
    }
}
