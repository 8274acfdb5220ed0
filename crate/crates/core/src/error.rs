use thiserror::Error;

use crate::cp::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    Domain(String),

    #[error("value {value} is not in the current domain of {var}")]
    ValueNotInDomain { var: VarId, value: i64 },

    #[error("cannot assign {var}: the search state is wiped out")]
    StateWiped { var: VarId },

    #[error("{var} is already assigned")]
    AlreadyAssigned { var: VarId },

    #[error("{var} is not a random variable")]
    NotRandom { var: VarId },

    #[error("{var} is referenced but not assigned")]
    Unassigned { var: VarId },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("network file {path}: {message}")]
    NetworkSchema { path: String, message: String },

    #[error("invalid learner configuration: {0}")]
    Config(String),

    #[error("no code for assignment {var}={value} in the hash table")]
    UnknownAssignment { var: VarId, value: i64 },

    #[error("value table was produced under solver fingerprint {found}, expected {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("value table format: {0}")]
    TableFormat(String),

    #[error("plan violates constraint #{index} ({description})")]
    InfeasiblePlan { index: usize, description: String },

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("{scenarios} scenarios exceed the exact evaluation limit of {limit}; use Monte Carlo evaluation")]
    TooManyScenarios { scenarios: u128, limit: u128 },

    #[error("{assignments} first-stage assignments exceed the enumeration limit of {limit}")]
    TooManyAssignments { assignments: u128, limit: u128 },

    #[error("no plan could be extracted: all {rollouts} greedy rollouts were truncated")]
    NoPlan { rollouts: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
