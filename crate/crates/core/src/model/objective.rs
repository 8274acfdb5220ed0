use serde::{Deserialize, Serialize};

use crate::cp::{ConstraintSpec, Domain, VarId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Sign that turns the objective into a reward to maximise.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }

    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

/// Arithmetic over assigned values, reified comparisons and computed outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Var(VarId),
    Output(String),
    /// 1 if the constraint holds, else 0.
    Reify(Box<ConstraintSpec>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
}

impl Expr {
    pub fn reify(c: ConstraintSpec) -> Self {
        Expr::Reify(Box::new(c))
    }

    pub fn eval(&self, values: &[Option<i64>], outputs: &[(String, f64)]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => values.get(v.index()).copied().flatten().ok_or(Error::Unassigned { var: *v })? as f64,
            Expr::Output(name) => outputs
                .iter()
                .find(|(n, _)| n == name)
                .map(|&(_, z)| z)
                .ok_or_else(|| Error::Model(format!("output `{name}` has not been computed")))?,
            Expr::Reify(c) => match c.holds(values) {
                Some(true) => 1.0,
                Some(false) => 0.0,
                None => {
                    let var = c.vars().into_iter().find(|v| values[v.index()].is_none()).expect("unassigned var");
                    return Err(Error::Unassigned { var });
                }
            },
            Expr::Sum(terms) => {
                let mut s = 0.0;
                for t in terms {
                    s += t.eval(values, outputs)?;
                }
                s
            }
            Expr::Product(terms) => {
                let mut p = 1.0;
                for t in terms {
                    p *= t.eval(values, outputs)?;
                }
                p
            }
        })
    }

    pub(crate) fn visit_vars(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Var(v) => f(*v),
            Expr::Reify(c) => c.vars().into_iter().for_each(f),
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().for_each(|t| t.visit_vars(f)),
            Expr::Const(_) | Expr::Output(_) => {}
        }
    }

    pub(crate) fn visit_outputs<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Output(name) => f(name),
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().for_each(|t| t.visit_outputs(f)),
            _ => {}
        }
    }

    /// An upper bound on `|value|` over every total assignment.
    pub(crate) fn magnitude_bound(&self, domains: &[Domain], output_bound: &impl Fn(&str) -> Option<f64>) -> Option<f64> {
        Some(match self {
            Expr::Const(c) => c.abs(),
            Expr::Var(v) => {
                let d = &domains[v.index()];
                d.min()?.unsigned_abs().max(d.max()?.unsigned_abs()) as f64
            }
            Expr::Output(name) => output_bound(name)?,
            Expr::Reify(_) => 1.0,
            Expr::Sum(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.magnitude_bound(domains, output_bound)?;
                }
                s
            }
            Expr::Product(ts) => {
                let mut p = 1.0;
                for t in ts {
                    p *= t.magnitude_bound(domains, output_bound)?;
                }
                p
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Optimise the expectation of `expr`.
    Expectation { expr: Expr },
    /// Maximise the probability that a single chance constraint holds; it is
    /// satisfied when that probability reaches `threshold`.
    SatisfactionProbability { constraint: ConstraintSpec, threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub mode: ObjectiveMode,
}

impl Objective {
    pub fn maximize(expr: Expr) -> Self {
        Objective { sense: Sense::Maximize, mode: ObjectiveMode::Expectation { expr } }
    }

    pub fn minimize(expr: Expr) -> Self {
        Objective { sense: Sense::Minimize, mode: ObjectiveMode::Expectation { expr } }
    }

    pub fn chance(constraint: ConstraintSpec, threshold: f64) -> Self {
        Objective { sense: Sense::Maximize, mode: ObjectiveMode::SatisfactionProbability { constraint, threshold } }
    }

    pub fn threshold(&self) -> Option<f64> {
        match &self.mode {
            ObjectiveMode::SatisfactionProbability { threshold, .. } => Some(*threshold),
            ObjectiveMode::Expectation { .. } => None,
        }
    }

    /// Value of a single scenario: the expression, or the 0/1 indicator of
    /// the chance constraint.
    pub fn sample(&self, values: &[Option<i64>], outputs: &[(String, f64)]) -> Result<f64> {
        match &self.mode {
            ObjectiveMode::Expectation { expr } => expr.eval(values, outputs),
            ObjectiveMode::SatisfactionProbability { constraint, .. } => Expr::Reify(Box::new(constraint.clone())).eval(values, outputs),
        }
    }
}
