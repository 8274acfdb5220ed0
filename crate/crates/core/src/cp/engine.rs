//! Propagation to fixpoint over a fixed set of constraints.

use super::constraint::ConstraintSpec;
use super::domain::{Domain, VarId, VarKind};
use super::fingerprint::{AllDifferentStrength, SolverFingerprint};
use super::state::SearchState;
use crate::error::{Error, Result};
use crate::network::Router;

/// Signals that a domain became empty.
struct Wipe;

type Filtered = std::result::Result<(), Wipe>;

/// The constraint solver an episode runs against. Immutable once built and
/// shared read-only between episodes.
#[derive(Debug, Clone)]
pub struct Engine {
    constraints: Vec<ConstraintSpec>,
    watches: Vec<Vec<usize>>,
    routers: Vec<Option<Router>>,
    strength: AllDifferentStrength,
}

impl Engine {
    pub fn new(constraints: &[ConstraintSpec], num_vars: usize, fingerprint: &SolverFingerprint) -> Self {
        let mut watches = vec![Vec::new(); num_vars];
        for (c, spec) in constraints.iter().enumerate() {
            for v in spec.vars() {
                if !watches[v.index()].contains(&c) {
                    watches[v.index()].push(c);
                }
            }
        }
        let routers = constraints
            .iter()
            .map(|c| match c {
                ConstraintSpec::ShortestPathCost(spec) => Some(Router::new(&spec.graph)),
                _ => None,
            })
            .collect();
        Engine { constraints: constraints.to_vec(), watches, routers, strength: fingerprint.all_different }
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    /// Runs every propagator until none can remove a value. A wipe-out sets
    /// the state's flag; a wiped state is left untouched.
    pub fn propagate(&self, state: &mut SearchState) {
        if state.wiped {
            return;
        }
        let mut pending = vec![true; self.constraints.len()];
        let mut changed = Vec::new();
        while let Some(c) = pending.iter().position(|&p| p) {
            pending[c] = false;
            changed.clear();
            if self.filter(c, state, &mut changed).is_err() {
                state.wiped = true;
                return;
            }
            // Each filter is idempotent, so only the other watchers need a rerun.
            for &v in &changed {
                for &w in &self.watches[v] {
                    if w != c {
                        pending[w] = true;
                    }
                }
            }
        }
    }

    /// Fixes `var` to `value` and propagates. Assigning outside the current
    /// domain, or into a wiped state, is a caller error.
    pub fn assign(&self, state: &mut SearchState, var: VarId, value: i64) -> Result<()> {
        if state.wiped {
            return Err(Error::StateWiped { var });
        }
        if state.is_assigned(var) {
            return Err(Error::AlreadyAssigned { var });
        }
        if !state.domain(var).contains(value) {
            return Err(Error::ValueNotInDomain { var, value });
        }
        state.domains[var.index()] = Domain::singleton(value);
        state.values[var.index()] = Some(value);
        state.assigned.push((var, value));
        self.propagate(state);
        Ok(())
    }

    /// Outputs of the suspended constraints under a complete assignment.
    pub fn compute_outputs(&self, values: &[Option<i64>], scratch: &mut Vec<f64>) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (c, spec) in self.constraints.iter().enumerate() {
            if let ConstraintSpec::ShortestPathCost(sp) = spec {
                if let Some(z) = self.recourse(c, values, scratch) {
                    out.push((sp.output.clone(), z));
                }
            }
        }
        out
    }

    fn recourse(&self, c: usize, values: &[Option<i64>], scratch: &mut Vec<f64>) -> Option<f64> {
        let ConstraintSpec::ShortestPathCost(spec) = &self.constraints[c] else { return None };
        let links = &spec.graph.links;
        if links.iter().any(|l| values[l.survival.index()].is_none()) {
            return None;
        }
        let router = self.routers[c].as_ref().expect("router for shortest path constraint");
        Some(router.total_cost(|i| values[links[i].survival.index()] == Some(1), spec.penalty, scratch))
    }

    fn filter(&self, c: usize, state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
        match &self.constraints[c] {
            ConstraintSpec::AllDifferent { vars } => match self.strength {
                AllDifferentStrength::Pairwise => all_different_pairwise(vars, state, changed),
                AllDifferentStrength::Cascade => all_different_cascade(vars, state, changed),
            },
            ConstraintSpec::LinearLe { coeffs, vars, bound } => linear_le(coeffs, vars, *bound, state, changed),
            ConstraintSpec::ReifiedLe { lhs, rhs } => less_equal(*lhs, *rhs, state, changed),
            ConstraintSpec::MaximalityGuard { costs, vars, budget } => maximality(costs, vars, *budget, state, changed),
            ConstraintSpec::ShortestPathCost(spec) => {
                if state.output(&spec.output).is_none() {
                    if let Some(z) = self.recourse(c, &state.values, &mut Vec::new()) {
                        state.set_output(&spec.output, z);
                    }
                }
                Ok(())
            }
        }
    }
}

/// A random variable may only be sampled while it still carries its full
/// model domain; otherwise some scenarios have been filtered away.
pub fn check_random_integrity(state: &SearchState, var: VarId, original: &Domain) -> Result<bool> {
    if var.kind() != VarKind::Random {
        return Err(Error::NotRandom { var });
    }
    if state.is_assigned(var) {
        return Err(Error::AlreadyAssigned { var });
    }
    Ok(state.domain(var) == original)
}

fn shrink(state: &mut SearchState, var: VarId, changed: &mut Vec<usize>, keep: impl FnMut(i64) -> bool) -> Filtered {
    let d = &mut state.domains[var.index()];
    if d.retain(keep) {
        changed.push(var.index());
        if d.is_empty() {
            return Err(Wipe);
        }
    }
    Ok(())
}

fn all_different_pairwise(vars: &[VarId], state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
    for &v in vars {
        let Some(value) = state.value(v) else { continue };
        for &w in vars {
            if w != v {
                shrink(state, w, changed, |x| x != value)?;
            }
        }
    }
    let mut fixed: Vec<i64> = vars.iter().filter_map(|&v| state.domain(v).fixed_value()).collect();
    fixed.sort_unstable();
    if fixed.windows(2).any(|w| w[0] == w[1]) {
        return Err(Wipe);
    }
    Ok(())
}

fn all_different_cascade(vars: &[VarId], state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
    let mut done = vec![false; vars.len()];
    loop {
        let next = (0..vars.len()).find(|&i| !done[i] && state.domain(vars[i]).fixed_value().is_some());
        let Some(i) = next else { break };
        done[i] = true;
        let value = state.domain(vars[i]).fixed_value().expect("singleton");
        for (j, &w) in vars.iter().enumerate() {
            if j != i {
                shrink(state, w, changed, |x| x != value)?;
            }
        }
    }
    let mut union: Vec<i64> = vars.iter().flat_map(|&v| state.domain(v).values().iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    if union.len() < vars.len() {
        return Err(Wipe);
    }
    Ok(())
}

fn linear_le(coeffs: &[i64], vars: &[VarId], bound: i64, state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
    let min_term = |state: &SearchState, c: i64, v: VarId| -> Option<i64> {
        let d = state.domain(v);
        if c >= 0 {
            d.min().map(|m| c * m)
        } else {
            d.max().map(|m| c * m)
        }
    };
    let mut mins = Vec::with_capacity(vars.len());
    for (&c, &v) in coeffs.iter().zip(vars) {
        mins.push(min_term(state, c, v).ok_or(Wipe)?);
    }
    let total: i64 = mins.iter().sum();
    for (i, (&c, &v)) in coeffs.iter().zip(vars).enumerate() {
        let slack = bound - (total - mins[i]);
        shrink(state, v, changed, |x| c * x <= slack)?;
    }
    Ok(())
}

fn less_equal(lhs: VarId, rhs: VarId, state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
    let hi = state.domain(rhs).max().ok_or(Wipe)?;
    shrink(state, lhs, changed, |x| x <= hi)?;
    let lo = state.domain(lhs).min().ok_or(Wipe)?;
    shrink(state, rhs, changed, |x| x >= lo)
}

fn maximality(costs: &[i64], vars: &[VarId], budget: i64, state: &mut SearchState, changed: &mut Vec<usize>) -> Filtered {
    // Largest spend each variable can still contribute.
    let mut most = Vec::with_capacity(vars.len());
    for (&c, &v) in costs.iter().zip(vars) {
        most.push(c * state.domain(v).max().ok_or(Wipe)?);
    }
    let reachable: i64 = most.iter().sum();
    for (e, (&c, &v)) in costs.iter().zip(vars).enumerate() {
        // Leaving link e out is only maximal if the others can overspend it.
        if state.domain(v).contains(0) && reachable - most[e] + c <= budget {
            shrink(state, v, changed, |x| x != 0)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(index: usize) -> VarId {
        VarId::decision(index)
    }

    fn state(domains: &[&[i64]]) -> SearchState {
        SearchState::new(domains.iter().map(|v| Domain::new(v.to_vec()).unwrap()).collect())
    }

    fn engine(constraints: Vec<ConstraintSpec>, n: usize) -> Engine {
        Engine::new(&constraints, n, &SolverFingerprint::default())
    }

    #[test]
    fn forward_checking_removes_assigned_values_only() {
        let e = engine(vec![ConstraintSpec::AllDifferent { vars: vec![d(0), d(1), d(2)] }], 3);
        let mut s = state(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        e.assign(&mut s, d(0), 1).unwrap();
        assert_eq!(s.domain(d(1)).values(), &[2]);
        assert_eq!(s.domain(d(2)).values(), &[2, 3]);
        assert!(!s.wiped());
    }

    #[test]
    fn cascade_deduces_the_last_value() {
        let fp = SolverFingerprint::default().with_all_different(AllDifferentStrength::Cascade);
        let e = Engine::new(&[ConstraintSpec::AllDifferent { vars: vec![d(0), d(1), d(2)] }], 3, &fp);
        let mut s = state(&[&[1, 2], &[1, 2], &[1, 2, 3]]);
        e.assign(&mut s, d(0), 1).unwrap();
        assert_eq!(s.domain(d(2)).values(), &[3]);
    }

    #[test]
    fn equal_singletons_wipe_out() {
        let e = engine(vec![ConstraintSpec::AllDifferent { vars: vec![d(0), d(1)] }], 2);
        let mut s = state(&[&[1], &[1]]);
        e.propagate(&mut s);
        assert!(s.wiped());
    }

    #[test]
    fn assignment_forcing_wipe_out() {
        let e = engine(vec![ConstraintSpec::AllDifferent { vars: vec![d(0), d(1)] }], 2);
        let mut s = state(&[&[1, 2], &[1]]);
        e.assign(&mut s, d(0), 1).unwrap();
        assert!(s.wiped());
        assert!(matches!(e.assign(&mut s, d(1), 1), Err(Error::StateWiped { .. })));
    }

    #[test]
    fn linear_bounds_reasoning() {
        let e = engine(vec![ConstraintSpec::LinearLe { coeffs: vec![3, 2], vars: vec![d(0), d(1)], bound: 4 }], 2);
        let mut s = state(&[&[0, 1], &[0, 1]]);
        e.assign(&mut s, d(0), 1).unwrap();
        assert_eq!(s.domain(d(1)).values(), &[0]);
    }

    #[test]
    fn linear_with_negative_coefficient() {
        // x - y <= -1, x in 0..3, y in 0..2  =>  x <= 1, y >= 1
        let e = engine(vec![ConstraintSpec::LinearLe { coeffs: vec![1, -1], vars: vec![d(0), d(1)], bound: -1 }], 2);
        let mut s = state(&[&[0, 1, 2, 3], &[0, 1, 2]]);
        e.propagate(&mut s);
        assert_eq!(s.domain(d(0)).values(), &[0, 1]);
        assert_eq!(s.domain(d(1)).values(), &[1, 2]);
    }

    #[test]
    fn singleton_assignment_keeps_domains() {
        let e = engine(vec![ConstraintSpec::AllDifferent { vars: vec![d(0), d(1)] }], 2);
        let mut s = state(&[&[1], &[2, 3]]);
        let before = s.clone();
        e.assign(&mut s, d(0), 1).unwrap();
        assert_eq!(s.domains(), before.domains());
        assert_eq!(s.assigned(), &[(d(0), 1)]);
    }

    #[test]
    fn rejects_values_outside_domain() {
        let e = engine(vec![], 1);
        let mut s = state(&[&[1, 2]]);
        assert!(matches!(e.assign(&mut s, d(0), 5), Err(Error::ValueNotInDomain { .. })));
    }

    #[test]
    fn maximality_forces_affordable_links() {
        // B=2, c=(3,2): link 1 cannot be afforded, link 2 must be taken.
        let guard = ConstraintSpec::MaximalityGuard { costs: vec![3, 2], vars: vec![d(0), d(1)], budget: 2 };
        let budget = ConstraintSpec::LinearLe { coeffs: vec![3, 2], vars: vec![d(0), d(1)], bound: 2 };
        let e = engine(vec![budget, guard], 2);
        let mut s = state(&[&[0, 1], &[0, 1]]);
        e.propagate(&mut s);
        assert_eq!(s.domain(d(0)).values(), &[0]);
        assert_eq!(s.domain(d(1)).values(), &[1]);
    }

    #[test]
    fn maximality_detects_dead_end() {
        // B=1, c=(1,1): choosing neither link is not maximal.
        let guard = ConstraintSpec::MaximalityGuard { costs: vec![1, 1], vars: vec![d(0), d(1)], budget: 1 };
        let e = engine(vec![guard], 2);
        let mut s = state(&[&[0, 1], &[0, 1]]);
        e.assign(&mut s, d(0), 0).unwrap();
        assert_eq!(s.domain(d(1)).values(), &[1]);
        let mut s = state(&[&[0, 1], &[0, 1]]);
        e.assign(&mut s, d(0), 1).unwrap();
        assert_eq!(s.domain(d(1)).values(), &[0, 1]);
    }

    #[test]
    fn integrity_check() {
        let r = VarId::random(1);
        let le = ConstraintSpec::ReifiedLe { lhs: d(0), rhs: r };
        let e = engine(vec![le], 2);
        let original = Domain::range(1, 3);
        let mut s = SearchState::new(vec![Domain::range(1, 3), original.clone()]);
        assert!(check_random_integrity(&s, r, &original).unwrap());
        e.assign(&mut s, d(0), 2).unwrap();
        assert!(!check_random_integrity(&s, r, &original).unwrap());
        e.assign(&mut s, r, 3).unwrap();
        assert!(check_random_integrity(&s, r, &original).is_err());
        assert!(check_random_integrity(&s, d(0), &original).is_err());
    }
}
