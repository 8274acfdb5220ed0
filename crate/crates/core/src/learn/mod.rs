//! Tabular TD(0) over Zobrist-hashed search states.
//!
//! An episode walks the variables in stage order through the propagation
//! engine. Decision values are chosen epsilon-greedily from the filtered
//! domain by the value of the successor state; random values are sampled
//! from their (possibly decision-dependent) distribution. Every assignment
//! earns a constant reward K, so probes that avoid dead-ends are preferred,
//! and a completed episode additionally earns its objective as a terminal
//! reward. Training is deterministic given the three seeds.

mod config;
mod table;
mod zobrist;

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{DecayShape, EpsilonSchedule, LearnerConfig, Seeds};
pub use table::ValueTable;
pub use zobrist::ZobristTable;

use crate::cp::{check_random_integrity, Engine, SearchState, SolverFingerprint, VarId};
use crate::error::{Error, Result};
use crate::eval::Plan;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Propagation emptied a domain.
    WipeOut,
    /// A random variable lost part of its domain before it was sampled, or
    /// its sampled value could not be assigned.
    IntegrityHalt,
}

/// How decision values are picked during an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Uniform with probability epsilon, otherwise greedy with random tie-breaking.
    Explore { epsilon: f64 },
    /// Greedy, ties broken by the lowest value.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    /// Slots of the visited states, starting with the empty assignment.
    pub states: Vec<usize>,
    /// `rewards[t]` is earned moving from `states[t]` to `states[t + 1]`.
    pub rewards: Vec<f64>,
    pub assignments: Vec<(VarId, i64)>,
    /// Per-scenario objective; present iff the episode completed.
    pub objective: Option<f64>,
    /// Reward on reaching the last state: the objective turned into a
    /// quantity to maximise, or 0 for truncated episodes.
    pub terminal_reward: f64,
    pub truncation: Option<Truncation>,
}

impl EpisodeTrace {
    pub fn truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum::<f64>() + self.terminal_reward
    }
}

/// TD(0) with discount 1, applied in reverse visiting order so that each
/// state bootstraps from its already-updated successor.
pub fn td_update(values: &mut ValueTable, trace: &EpisodeTrace, alpha: f64) {
    let v = values.values_mut();
    let Some(&last) = trace.states.last() else { return };
    v[last] += alpha * (trace.terminal_reward - v[last]);
    for t in (0..trace.states.len() - 1).rev() {
        let (s, next) = (trace.states[t], trace.states[t + 1]);
        v[s] += alpha * (trace.rewards[t] + v[next] - v[s]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub episode: u64,
    /// Mean objective of the greedy rollouts; `None` if all were truncated.
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Training {
    pub values: ValueTable,
    pub curve: Vec<CurvePoint>,
    pub truncated_episodes: u64,
}

/// Result of greedy rollouts against a frozen value table.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub plan: Plan,
    pub stderr: f64,
    pub completed: usize,
    pub rollouts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionStats {
    pub distinct_states: usize,
    pub occupied_slots: usize,
    pub colliding_slots: usize,
    pub max_states_per_slot: usize,
}

/// A model, a solver configuration and learner settings bundled for running
/// episodes. Read-only; runs with different seeds can share nothing.
pub struct Learner<'m> {
    model: &'m Model,
    fingerprint: SolverFingerprint,
    engine: Engine,
    zobrist: ZobristTable,
    order: Vec<VarId>,
    config: LearnerConfig,
    k: f64,
}

impl<'m> Learner<'m> {
    pub fn new(model: &'m Model, fingerprint: SolverFingerprint, config: LearnerConfig) -> Result<Self> {
        let k = config.validate(model)?;
        let zobrist = ZobristTable::new(model, config.hash_size, config.seeds.zobrist)?;
        let order = model.stage_variable_order(fingerprint.order_seed);
        Ok(Learner { model, engine: model.engine(&fingerprint), fingerprint, zobrist, order, config, k })
    }

    pub fn k_reward(&self) -> f64 {
        self.k
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> &SolverFingerprint {
        &self.fingerprint
    }

    pub fn zobrist(&self) -> &ZobristTable {
        &self.zobrist
    }

    pub fn variable_order(&self) -> &[VarId] {
        &self.order
    }

    pub fn new_table(&self) -> ValueTable {
        ValueTable::new(self.config.hash_size, &self.fingerprint, self.zobrist.seed())
    }

    fn check_table(&self, values: &ValueTable) -> Result<()> {
        values.ensure_matches(&self.fingerprint)?;
        if values.len() != self.zobrist.hash_size() || values.zobrist_seed() != self.zobrist.seed() {
            return Err(Error::Config(format!(
                "value table (H={}, zobrist seed {}) does not match the learner (H={}, seed {})",
                values.len(),
                values.zobrist_seed(),
                self.zobrist.hash_size(),
                self.zobrist.seed()
            )));
        }
        Ok(())
    }

    /// One forward probe from the empty assignment.
    pub fn run_episode<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        values: &ValueTable,
        policy: Policy,
        explore_rng: &mut R1,
        sample_rng: &mut R2,
    ) -> Result<EpisodeTrace> {
        self.check_table(values)?;
        Ok(self.episode(values, policy, explore_rng, sample_rng))
    }

    fn episode<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &self,
        values: &ValueTable,
        policy: Policy,
        explore_rng: &mut R1,
        sample_rng: &mut R2,
    ) -> EpisodeTrace {
        let n = self.order.len();
        let mut state: SearchState = self.model.initial_state();
        let mut key = 0u64;
        let mut states = Vec::with_capacity(n + 1);
        let mut rewards = Vec::with_capacity(n);
        states.push(self.zobrist.slot(key));
        let mut truncation = if state.wiped() { Some(Truncation::WipeOut) } else { None };
        let mut ties = Vec::new();

        for &var in &self.order {
            if truncation.is_some() {
                break;
            }
            let value = if var.is_random() {
                let intact = check_random_integrity(&state, var, self.model.domain(var)).expect("unassigned random variable");
                if !intact {
                    truncation = Some(Truncation::IntegrityHalt);
                    break;
                }
                let pmf = self.model.resolve_pmf(var, state.values()).expect("validated distribution");
                pmf.sample(sample_rng)
            } else {
                self.choose(&state, var, key, values, policy, explore_rng, &mut ties)
            };
            self.engine.assign(&mut state, var, value).expect("value from the current domain");
            key ^= self.zobrist.code(var, value).expect("model value");
            states.push(self.zobrist.slot(key));
            rewards.push(self.k);
            if state.wiped() {
                truncation = Some(if var.is_random() { Truncation::IntegrityHalt } else { Truncation::WipeOut });
            }
        }

        let objective = match truncation {
            Some(_) => None,
            None => Some(self.model.objective.sample(state.values(), state.outputs()).expect("total assignment")),
        };
        let terminal_reward = objective.map_or(0.0, |o| self.model.objective.sense.sign() * o);
        EpisodeTrace { states, rewards, assignments: state.assigned().to_vec(), objective, terminal_reward, truncation }
    }

    #[allow(clippy::too_many_arguments)]
    fn choose<R: Rng + ?Sized>(
        &self,
        state: &SearchState,
        var: VarId,
        key: u64,
        values: &ValueTable,
        policy: Policy,
        rng: &mut R,
        ties: &mut Vec<i64>,
    ) -> i64 {
        let candidates = state.domain(var).values();
        debug_assert!(!candidates.is_empty());
        if let Policy::Explore { epsilon } = policy {
            if rng.random::<f64>() < epsilon {
                return candidates[rng.random_range(0..candidates.len())];
            }
        }
        let score = |a: i64| values.get(self.zobrist.slot(key ^ self.zobrist.code(var, a).expect("model value")));
        ties.clear();
        let mut best = f64::NEG_INFINITY;
        for &a in candidates {
            let s = score(a);
            if s > best {
                best = s;
                ties.clear();
                ties.push(a);
            } else if s == best {
                ties.push(a);
            }
        }
        match policy {
            Policy::Greedy => ties[0],
            Policy::Explore { .. } if ties.len() == 1 => ties[0],
            Policy::Explore { .. } => ties[rng.random_range(0..ties.len())],
        }
    }

    /// Runs the configured number of episodes from an all-zero table,
    /// recording a greedy estimate at every checkpoint.
    pub fn train(&self) -> Result<Training> {
        let mut values = self.new_table();
        let mut explore_rng = ChaCha8Rng::seed_from_u64(self.config.seeds.exploration);
        let mut sample_rng = ChaCha8Rng::seed_from_u64(self.config.seeds.sampling);
        let mut checkpoints = self.config.checkpoints.clone();
        checkpoints.sort_unstable();
        checkpoints.dedup();
        let mut next_checkpoint = checkpoints.iter().peekable();
        let mut curve = Vec::with_capacity(checkpoints.len());
        let mut truncated_episodes = 0;
        let total = self.config.episodes;

        let record = |episode: u64, values: &ValueTable, curve: &mut Vec<CurvePoint>| -> Result<()> {
            let estimate = match self.extract_plan_at(values, episode) {
                Ok(ex) => Some(ex.plan.estimated.expect("greedy estimate")),
                Err(Error::NoPlan { .. }) => None,
                Err(e) => return Err(e),
            };
            curve.push(CurvePoint { episode, estimate });
            Ok(())
        };

        while next_checkpoint.peek().is_some_and(|&&c| c == 0) {
            next_checkpoint.next();
            record(0, &values, &mut curve)?;
        }
        for e in 0..total {
            let epsilon = self.config.epsilon.at(e, total);
            let trace = self.episode(&values, Policy::Explore { epsilon }, &mut explore_rng, &mut sample_rng);
            if trace.truncated() {
                truncated_episodes += 1;
            }
            td_update(&mut values, &trace, self.config.alpha);
            if next_checkpoint.peek().is_some_and(|&&c| c == e + 1) {
                next_checkpoint.next();
                record(e + 1, &values, &mut curve)?;
            }
        }
        Ok(Training { values, curve, truncated_episodes })
    }

    /// Greedy rollouts against `values`. The plan is the first-stage decision
    /// assignment they share; the estimate is their mean objective.
    pub fn extract_plan(&self, values: &ValueTable) -> Result<Extraction> {
        self.check_table(values)?;
        self.extract_plan_at(values, u64::MAX)
    }

    fn extract_plan_at(&self, values: &ValueTable, stream: u64) -> Result<Extraction> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seeds.sampling);
        // Evaluation draws from its own stream so checkpoints never disturb training.
        rng.set_stream(stream.wrapping_add(1));
        let first_stage = self.model.first_stage_decisions();
        let rollouts = self.config.eval_rollouts;
        let mut plan: Option<Vec<(VarId, i64)>> = None;
        let mut samples = Vec::with_capacity(rollouts);
        let mut unused = NoRng;
        for _ in 0..rollouts {
            let trace = self.episode(values, Policy::Greedy, &mut unused, &mut rng);
            let Some(objective) = trace.objective else { continue };
            let mut decisions: Vec<(VarId, i64)> = trace.assignments.iter().copied().filter(|(v, _)| first_stage.contains(v)).collect();
            decisions.sort();
            match &plan {
                None => plan = Some(decisions),
                Some(p) if *p != decisions => {
                    return Err(Error::Unsupported("greedy rollouts disagree on the first-stage decisions".into()))
                }
                Some(_) => {}
            }
            samples.push(objective);
        }
        let Some(decisions) = plan else { return Err(Error::NoPlan { rollouts }) };
        let (mean, stderr) = crate::eval::mean_stderr(&samples);
        Ok(Extraction { plan: Plan { decisions, estimated: Some(mean), exact: None }, stderr, completed: samples.len(), rollouts })
    }

    /// Counts distinct exact states per slot over `episodes` uniformly random
    /// probes. Meant for small diagnostic runs.
    pub fn collision_probe(&self, episodes: u64, seed: u64) -> CollisionStats {
        let values = self.new_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sample_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        let mut slots: HashMap<usize, HashSet<Vec<(VarId, i64)>>> = HashMap::new();
        for _ in 0..episodes {
            let trace = self.episode(&values, Policy::Explore { epsilon: 1.0 }, &mut rng, &mut sample_rng);
            for (t, &slot) in trace.states.iter().enumerate() {
                let mut exact = trace.assignments[..t].to_vec();
                exact.sort();
                slots.entry(slot).or_default().insert(exact);
            }
        }
        CollisionStats {
            distinct_states: slots.values().map(HashSet::len).sum(),
            occupied_slots: slots.len(),
            colliding_slots: slots.values().filter(|s| s.len() > 1).count(),
            max_states_per_slot: slots.values().map(HashSet::len).max().unwrap_or(0),
        }
    }
}

/// Greedy episodes never consume exploration randomness.
struct NoRng;

impl rand::RngCore for NoRng {
    fn next_u32(&mut self) -> u32 {
        unreachable!("greedy policy drew exploration randomness")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("greedy policy drew exploration randomness")
    }
    fn fill_bytes(&mut self, _: &mut [u8]) {
        unreachable!("greedy policy drew exploration randomness")
    }
}
