use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{Domain, VarId};
use crate::error::{Error, Result};

pub const PMF_TOLERANCE: f64 = 1e-9;

/// A finite probability mass function over integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Pmf {
    pairs: Vec<(i64, f64)>,
}

impl Pmf {
    pub fn new(pairs: Vec<(i64, f64)>) -> Result<Self> {
        let pmf = Pmf { pairs };
        pmf.check()?;
        Ok(pmf)
    }

    /// Equal mass on every value of `domain`.
    pub fn uniform(domain: &Domain) -> Self {
        let p = 1.0 / domain.len() as f64;
        Pmf { pairs: domain.values().iter().map(|&v| (v, p)).collect() }
    }

    /// Two-point distribution on {0, 1} with `P(1) = p_one`.
    pub fn bernoulli(p_one: f64) -> Result<Self> {
        Self::new(vec![(0, 1.0 - p_one), (1, p_one)])
    }

    pub fn pairs(&self) -> &[(i64, f64)] {
        &self.pairs
    }

    pub fn probability(&self, value: i64) -> f64 {
        self.pairs.iter().find(|&&(v, _)| v == value).map_or(0.0, |&(_, p)| p)
    }

    fn check(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Model("empty probability distribution".into()));
        }
        let mut total = 0.0;
        for (i, &(v, p)) in self.pairs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Model(format!("probability {p} of value {v} outside [0,1]")));
            }
            if self.pairs[..i].iter().any(|&(w, _)| w == v) {
                return Err(Error::Model(format!("value {v} listed twice in a distribution")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::Model(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    pub(crate) fn validate_for(&self, var: VarId, domain: &Domain) -> Result<()> {
        self.check().map_err(|e| Error::Model(format!("{var}: {e}")))?;
        if let Some(&(v, _)) = self.pairs.iter().find(|(v, _)| !domain.contains(*v)) {
            return Err(Error::Model(format!("{var}: distribution value {v} is outside its domain")));
        }
        Ok(())
    }

    /// Inverse-CDF sample; the last value absorbs rounding.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(v, p) in &self.pairs {
            acc += p;
            if u < acc {
                return v;
            }
        }
        self.pairs.iter().rev().find(|&&(_, p)| p > 0.0).map_or(self.pairs[0].0, |&(v, _)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCase {
    pub when: i64,
    pub pmf: Pmf,
}

/// Where the distribution of a random variable comes from. A conditional
/// distribution depends on the value of an earlier decision variable
/// (endogenous uncertainty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Fixed { pmf: Pmf },
    Conditional { on: VarId, cases: Vec<ConditionalCase> },
}

impl Distribution {
    /// Resolves the pmf given the current values of all variables.
    pub fn resolve(&self, values: &[Option<i64>]) -> Result<&Pmf> {
        match self {
            Distribution::Fixed { pmf } => Ok(pmf),
            Distribution::Conditional { on, cases } => {
                let value = values.get(on.index()).copied().flatten().ok_or(Error::Unassigned { var: *on })?;
                cases
                    .iter()
                    .find(|c| c.when == value)
                    .map(|c| &c.pmf)
                    .ok_or_else(|| Error::Model(format!("no distribution case for {on}={value}")))
            }
        }
    }
}
