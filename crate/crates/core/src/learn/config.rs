use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayShape {
    Linear,
    Exponential,
}

/// Exploration rate decaying from `start` to `end` over the first
/// `decay_fraction` of the episodes, constant afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
    pub shape: DecayShape,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 0.2, end: 0.01, decay_fraction: 0.8, shape: DecayShape::Linear }
    }
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        EpsilonSchedule { start: epsilon, end: epsilon, decay_fraction: 0.0, shape: DecayShape::Linear }
    }

    pub fn at(&self, episode: u64, total: u64) -> f64 {
        let horizon = self.decay_fraction * total as f64;
        if horizon <= 0.0 {
            return self.end;
        }
        let frac = (episode as f64 / horizon).min(1.0);
        match self.shape {
            DecayShape::Linear => self.start + (self.end - self.start) * frac,
            DecayShape::Exponential => {
                if self.start <= 0.0 || self.end <= 0.0 {
                    self.start + (self.end - self.start) * frac
                } else {
                    self.start * (self.end / self.start).powf(frac)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, e) in [("start", self.start), ("end", self.end)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Config(format!("epsilon {name}={e} outside [0,1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.decay_fraction) {
            return Err(Error::Config(format!("decay fraction {} outside [0,1]", self.decay_fraction)));
        }
        Ok(())
    }
}

/// The three independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub zobrist: u64,
    pub exploration: u64,
    pub sampling: u64,
}

impl Seeds {
    /// Derives the three streams from one run seed.
    pub fn from_base(seed: u64) -> Self {
        let mix = |salt: u64| {
            // splitmix64 finaliser
            let mut z = seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        Seeds { zobrist: mix(1), exploration: mix(2), sampling: mix(3) }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::from_base(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub episodes: u64,
    pub alpha: f64,
    pub epsilon: EpsilonSchedule,
    /// Reward per successful assignment; defaults to the objective bound + 1.
    pub k_reward: Option<f64>,
    /// Overrides the model's bound on `|objective|` used to validate K.
    pub objective_bound: Option<f64>,
    pub hash_size: usize,
    pub seeds: Seeds,
    pub eval_rollouts: usize,
    /// Episode counts after which a greedy estimate is recorded.
    pub checkpoints: Vec<u64>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            episodes: 100_000,
            alpha: 0.1,
            epsilon: EpsilonSchedule::default(),
            k_reward: None,
            objective_bound: None,
            hash_size: 100_000,
            seeds: Seeds::default(),
            eval_rollouts: 1000,
            checkpoints: Vec::new(),
        }
    }
}

impl LearnerConfig {
    /// Ten evenly spaced checkpoints ending at the last episode.
    pub fn even_checkpoints(episodes: u64, count: u64) -> Vec<u64> {
        if episodes == 0 || count == 0 {
            return Vec::new();
        }
        let mut points: Vec<u64> = (1..=count).map(|i| episodes * i / count).filter(|&e| e > 0).collect();
        points.dedup();
        points
    }

    /// Checks the configuration and returns the per-assignment reward K,
    /// which must exceed every attainable `|objective|`.
    pub fn validate(&self, model: &Model) -> Result<f64> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha={} outside [0,1]", self.alpha)));
        }
        self.epsilon.validate()?;
        if self.hash_size == 0 {
            return Err(Error::Config("hash size must be positive".into()));
        }
        if self.eval_rollouts == 0 {
            return Err(Error::Config("at least one evaluation rollout is needed".into()));
        }
        let bound = self
            .objective_bound
            .or_else(|| model.objective_bound())
            .ok_or_else(|| Error::Config("no bound on the objective is known; supply one to validate K".into()))?;
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::Config(format!("objective bound {bound} is not a finite magnitude")));
        }
        let k = self.k_reward.unwrap_or(bound + 1.0);
        if !(k.is_finite() && k > bound) {
            return Err(Error::Config(format!("K={k} must exceed the largest possible |objective| {bound}")));
        }
        Ok(k)
    }
}
