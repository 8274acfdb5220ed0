//! Stochastic constraint satisfaction/optimisation models.
//!
//! A [`Model`] holds decision and random variables with their domains, the
//! distributions of the random variables (possibly conditioned on earlier
//! decisions), hard constraints, the objective and the stage structure.
//! Models are validated on construction and immutable afterwards.
//!
//! The on-disk form is JSON (see `docs/model-format.md`); variables are
//! referenced as `v<index>` (decision) and `s<index>` (stochastic).

mod objective;
mod pmf;

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use objective::{Expr, Objective, ObjectiveMode, Sense};
pub use pmf::{ConditionalCase, Distribution, Pmf, PMF_TOLERANCE};

use crate::cp::{ConstraintSpec, Domain, Engine, SearchState, SolverFingerprint, VarId, VarKind};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub decisions: Vec<VarId>,
    pub randoms: Vec<VarId>,
    /// Second-stage quantities computed by an algorithm rather than chosen.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub computed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub version: u32,
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<ConstraintSpec>,
    pub objective: Objective,
    pub stages: Vec<Stage>,
    /// Bound on the absolute per-scenario objective. Derived from the
    /// expression when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_bound: Option<f64>,
}

impl Model {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        constraints: Vec<ConstraintSpec>,
        objective: Objective,
        stages: Vec<Stage>,
    ) -> Result<Self> {
        let model =
            Model { version: MODEL_FORMAT_VERSION, name: name.into(), variables, constraints, objective, stages, objective_bound: None };
        model.validate()?;
        Ok(model)
    }

    pub fn with_objective_bound(mut self, bound: f64) -> Result<Self> {
        self.objective_bound = Some(bound);
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Model = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported model version {} (expected {MODEL_FORMAT_VERSION})", self.version)));
        }
        let kinds = self.kinds();
        let mut names = BTreeSet::new();
        for (i, var) in self.variables.iter().enumerate() {
            let id = VarId::new(i, var.kind);
            if !names.insert(var.name.as_str()) {
                return Err(Error::Model(format!("duplicate variable name `{}`", var.name)));
            }
            if var.domain.is_empty() {
                return Err(Error::Model(format!("{id} (`{}`) has an empty domain", var.name)));
            }
            match (&var.kind, &var.distribution) {
                (VarKind::Decision, Some(_)) => return Err(Error::Model(format!("decision variable `{}` has a distribution", var.name))),
                (VarKind::Random, None) => return Err(Error::Model(format!("random variable `{}` has no distribution", var.name))),
                (VarKind::Random, Some(Distribution::Fixed { pmf })) => pmf.validate_for(id, &var.domain)?,
                (VarKind::Random, Some(Distribution::Conditional { on, cases })) => {
                    self.check_ref(*on, &kinds)?;
                    if on.is_random() {
                        return Err(Error::Model(format!("{id} is conditioned on random variable {on}")));
                    }
                    let on_domain = &self.variables[on.index()].domain;
                    for &value in on_domain.values() {
                        if cases.iter().filter(|c| c.when == value).count() != 1 {
                            return Err(Error::Model(format!("{id}: needs exactly one case for {on}={value}")));
                        }
                    }
                    for case in cases {
                        if !on_domain.contains(case.when) {
                            return Err(Error::Model(format!("{id}: case {on}={} is outside its domain", case.when)));
                        }
                        case.pmf.validate_for(id, &var.domain)?;
                    }
                }
                (VarKind::Decision, None) => {}
            }
        }

        let mut outputs = BTreeSet::new();
        for c in &self.constraints {
            c.validate(&kinds)?;
            match c {
                ConstraintSpec::MaximalityGuard { vars, .. } => {
                    for v in vars {
                        if !self.variables[v.index()].domain.is_subset_of(&Domain::range(0, 1)) {
                            return Err(Error::Model(format!("maximality_guard: {v} is not binary")));
                        }
                    }
                }
                ConstraintSpec::ShortestPathCost(spec) => {
                    if !outputs.insert(spec.output.as_str()) {
                        return Err(Error::Model(format!("output `{}` is computed twice", spec.output)));
                    }
                    if names.contains(spec.output.as_str()) {
                        return Err(Error::Model(format!("output `{}` clashes with a variable name", spec.output)));
                    }
                }
                _ => {}
            }
        }

        match &self.objective.mode {
            ObjectiveMode::Expectation { expr } => {
                let mut bad = None;
                expr.visit_vars(&mut |v| {
                    if bad.is_none() {
                        bad = self.check_ref(v, &kinds).err();
                    }
                });
                if let Some(e) = bad {
                    return Err(e);
                }
                let mut missing = None;
                expr.visit_outputs(&mut |name| {
                    if !outputs.contains(name) {
                        missing.get_or_insert_with(|| name.to_owned());
                    }
                });
                if let Some(name) = missing {
                    return Err(Error::Model(format!("objective uses output `{name}` that no constraint computes")));
                }
            }
            ObjectiveMode::SatisfactionProbability { constraint, threshold } => {
                constraint.validate(&kinds)?;
                if !(*threshold > 0.0 && *threshold <= 1.0) {
                    return Err(Error::Model(format!("threshold {threshold} outside (0,1]")));
                }
                if self.objective.sense != Sense::Maximize {
                    return Err(Error::Model("a satisfaction probability can only be maximised".into()));
                }
            }
        }

        self.check_stages(&kinds, &outputs)?;

        if let Some(b) = self.objective_bound {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Model(format!("objective bound {b} must be positive and finite")));
            }
        }
        Ok(())
    }

    fn check_ref(&self, v: VarId, kinds: &[VarKind]) -> Result<()> {
        match kinds.get(v.index()) {
            Some(&k) if k == v.kind() => Ok(()),
            Some(_) => Err(Error::Model(format!("{v} refers to a variable of the other kind"))),
            None => Err(Error::Model(format!("{v} is not declared"))),
        }
    }

    fn check_stages(&self, kinds: &[VarKind], outputs: &BTreeSet<&str>) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Model("at least one stage is required".into()));
        }
        let mut stage_of = vec![usize::MAX; self.variables.len()];
        for (s, stage) in self.stages.iter().enumerate() {
            for (list, kind) in [(&stage.decisions, VarKind::Decision), (&stage.randoms, VarKind::Random)] {
                for &v in list {
                    self.check_ref(v, kinds)?;
                    if v.kind() != kind {
                        return Err(Error::Model(format!("stage {}: {v} listed with the wrong kind", s + 1)));
                    }
                    if stage_of[v.index()] != usize::MAX {
                        return Err(Error::Model(format!("{v} appears in more than one stage position")));
                    }
                    stage_of[v.index()] = s;
                }
            }
            for name in &stage.computed {
                if !outputs.contains(name.as_str()) {
                    return Err(Error::Model(format!("stage {}: no constraint computes `{name}`", s + 1)));
                }
            }
        }
        if let Some(i) = stage_of.iter().position(|&s| s == usize::MAX) {
            return Err(Error::Model(format!("`{}` is not in any stage", self.variables[i].name)));
        }
        // A conditioning decision must be fixed before its random variable is reached.
        for (i, var) in self.variables.iter().enumerate() {
            if let Some(Distribution::Conditional { on, .. }) = &var.distribution {
                if stage_of[on.index()] > stage_of[i] {
                    return Err(Error::Model(format!("`{}` depends on a later-stage decision {on}", var.name)));
                }
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn kinds(&self) -> Vec<VarKind> {
        self.variables.iter().map(|v| v.kind).collect()
    }

    pub fn var_id(&self, index: usize) -> VarId {
        VarId::new(index, self.variables[index].kind)
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(|i| self.var_id(i))
    }

    pub fn variable(&self, var: VarId) -> &Variable {
        &self.variables[var.index()]
    }

    pub fn domain(&self, var: VarId) -> &Domain {
        &self.variables[var.index()].domain
    }

    pub fn decision_vars(&self) -> Vec<VarId> {
        (0..self.num_vars()).map(|i| self.var_id(i)).filter(|v| !v.is_random()).collect()
    }

    pub fn random_vars(&self) -> Vec<VarId> {
        (0..self.num_vars()).map(|i| self.var_id(i)).filter(|v| v.is_random()).collect()
    }

    /// Decisions of the first stage, in declaration order.
    pub fn first_stage_decisions(&self) -> Vec<VarId> {
        let mut v = self.stages[0].decisions.clone();
        v.sort();
        v
    }

    pub fn initial_domains(&self) -> Vec<Domain> {
        self.variables.iter().map(|v| v.domain.clone()).collect()
    }

    /// The empty assignment, unpropagated.
    pub fn initial_state(&self) -> SearchState {
        SearchState::new(self.initial_domains())
    }

    pub fn engine(&self, fingerprint: &SolverFingerprint) -> Engine {
        Engine::new(&self.constraints, self.num_vars(), fingerprint)
    }

    /// The distribution of random variable `var` given the current values.
    pub fn resolve_pmf(&self, var: VarId, values: &[Option<i64>]) -> Result<&Pmf> {
        self.variables[var.index()].distribution.as_ref().ok_or(Error::NotRandom { var })?.resolve(values)
    }

    /// Probability of the random values in `values` under the distributions
    /// resolved by the decisions in `values`.
    pub fn scenario_probability(&self, values: &[Option<i64>]) -> Result<f64> {
        let mut p = 1.0;
        for var in self.random_vars() {
            let value = values[var.index()].ok_or(Error::Unassigned { var })?;
            if !self.domain(var).contains(value) {
                return Err(Error::ValueNotInDomain { var, value });
            }
            p *= self.resolve_pmf(var, values)?.probability(value);
        }
        Ok(p)
    }

    /// The per-scenario objective of a total assignment, computing any
    /// recourse outputs first.
    pub fn objective_value(&self, values: &[Option<i64>]) -> Result<f64> {
        if let Some(i) = values.iter().position(Option::is_none) {
            return Err(Error::Unassigned { var: self.var_id(i) });
        }
        let outputs = self.engine(&SolverFingerprint::default()).compute_outputs(values, &mut Vec::new());
        self.objective.sample(values, &outputs)
    }

    /// Variables in stage order: each stage's decisions (shuffled when a seed
    /// is given) followed by its random variables in declaration order.
    pub fn stage_variable_order(&self, seed: Option<u64>) -> Vec<VarId> {
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let mut order = Vec::with_capacity(self.num_vars());
        for stage in &self.stages {
            let mut decisions = stage.decisions.clone();
            if let Some(rng) = rng.as_mut() {
                decisions.shuffle(rng);
            }
            order.extend(decisions);
            let mut randoms = stage.randoms.clone();
            randoms.sort();
            order.extend(randoms);
        }
        order
    }

    /// Bound on `|objective|` for any scenario: explicit, or derived from the
    /// objective expression.
    pub fn objective_bound(&self) -> Option<f64> {
        if self.objective_bound.is_some() {
            return self.objective_bound;
        }
        match &self.objective.mode {
            ObjectiveMode::SatisfactionProbability { .. } => Some(1.0),
            ObjectiveMode::Expectation { expr } => {
                let domains = self.initial_domains();
                let output_bound = |name: &str| {
                    self.constraints.iter().find_map(|c| match c {
                        ConstraintSpec::ShortestPathCost(spec) if spec.output == name => Some(spec.graph.cost_bound(spec.penalty)),
                        _ => None,
                    })
                };
                expr.magnitude_bound(&domains, &output_bound)
            }
        }
    }

    /// Number of scenarios, i.e. the product of random-domain sizes.
    pub fn scenario_count(&self) -> u128 {
        self.random_vars().iter().fold(1u128, |n, &v| n.saturating_mul(self.domain(v).len() as u128))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin_model(p: [f64; 2]) -> Model {
        let d = VarId::decision(0);
        let vars = vec![
            Variable { name: "d".into(), kind: VarKind::Decision, domain: Domain::range(0, 1), distribution: None },
            Variable {
                name: "a".into(),
                kind: VarKind::Random,
                domain: Domain::range(0, 1),
                distribution: Some(Distribution::Fixed { pmf: Pmf::bernoulli(p[0]).unwrap() }),
            },
            Variable {
                name: "b".into(),
                kind: VarKind::Random,
                domain: Domain::range(0, 1),
                distribution: Some(Distribution::Fixed { pmf: Pmf::bernoulli(p[1]).unwrap() }),
            },
        ];
        let objective = Objective::maximize(Expr::Sum(vec![Expr::Var(VarId::random(1)), Expr::Var(d)]));
        let stages = vec![Stage { decisions: vec![d], randoms: vec![VarId::random(1), VarId::random(2)], computed: vec![] }];
        Model::new("coins", vars, vec![], objective, stages).unwrap()
    }

    #[test]
    fn independent_marginals_multiply() {
        let m = coin_model([0.9, 0.5]);
        let p = m.scenario_probability(&[Some(0), Some(1), Some(1)]).unwrap();
        assert!((p - 0.45).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = coin_model([0.3, 0.8]);
        let mut total = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                total += m.scenario_probability(&[Some(1), Some(a), Some(b)]).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stage_order_is_declaration_order_without_seed() {
        let m = coin_model([0.5, 0.5]);
        assert_eq!(m.stage_variable_order(None), vec![VarId::decision(0), VarId::random(1), VarId::random(2)]);
        assert_eq!(m.stage_variable_order(Some(9)), m.stage_variable_order(Some(9)));
    }

    #[test]
    fn rejects_partial_stage_cover() {
        let mut m = coin_model([0.5, 0.5]);
        m.stages[0].randoms.pop();
        assert!(m.validate().is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let m = coin_model([0.5, 0.5]);
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        v["version"] = 7.into();
        assert!(Model::from_json(&v.to_string()).is_err());
        v["version"] = 1.into();
        v["extra"] = 1.into();
        assert!(Model::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn derived_bound() {
        let m = coin_model([0.5, 0.5]);
        assert_eq!(m.objective_bound(), Some(2.0));
    }
}
