//! Finite-domain variables, constraints and propagation.
//!
//! Episodes never backtrack: each one starts from a fresh [`SearchState`] and
//! only moves forward through [`Engine::assign`]. A wipe-out is recorded on the
//! state rather than reported as an error.

mod constraint;
mod domain;
mod engine;
mod fingerprint;
mod state;

pub use constraint::{ConstraintSpec, ShortestPathSpec};
pub use domain::{Domain, VarId, VarKind};
pub use engine::{check_random_integrity, Engine};
pub use fingerprint::{AllDifferentStrength, SolverFingerprint, ENGINE_VERSION};
pub use state::SearchState;
