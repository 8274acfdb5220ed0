//! Stochastic constraint programs solved by temporal-difference learning.
//!
//! A model ([`model::Model`]) describes decision and random variables, hard
//! constraints, an objective and stages. The learner ([`learn::Learner`])
//! runs forward probes through the propagation engine ([`cp::Engine`]),
//! aggregating search states with Zobrist hashing into a fixed-size value
//! table, and extracts a first-stage plan by greedy rollouts. The
//! [`eval`] module scores plans exactly or by sampling, and [`benchmarks`]
//! builds the artificial and pre-disaster problem families.

pub mod benchmarks;
pub mod cp;
pub mod error;
pub mod eval;
pub mod learn;
pub mod model;
pub mod network;

pub use cp::{AllDifferentStrength, ConstraintSpec, Domain, SearchState, SolverFingerprint, VarId, VarKind};
pub use error::{Error, Result};
pub use eval::{Limits, Plan};
pub use learn::{Learner, LearnerConfig, ValueTable};
pub use model::{Model, Sense};
pub use network::Network;
