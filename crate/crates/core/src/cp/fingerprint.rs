use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Version tag of the propagation code. Bump whenever filtering behaviour
/// changes, since learned value tables depend on it.
pub const ENGINE_VERSION: &str = "tdcp-engine/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllDifferentStrength {
    /// Pairwise disequality: assigned values are removed from the other
    /// variables, and two equal singletons fail.
    #[default]
    Pairwise,
    /// Singleton domains propagate like assignments, plus a pigeonhole check
    /// over the union of domains.
    Cascade,
}

impl fmt::Display for AllDifferentStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AllDifferentStrength::Pairwise => "pairwise",
            AllDifferentStrength::Cascade => "cascade",
        })
    }
}

/// Everything about the solver that shapes the state space a learned policy
/// was trained on. A value table is only meaningful under the fingerprint it
/// was trained with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolverFingerprint {
    pub all_different: AllDifferentStrength,
    pub order_seed: Option<u64>,
    pub version: String,
}

impl Default for SolverFingerprint {
    fn default() -> Self {
        SolverFingerprint { all_different: AllDifferentStrength::default(), order_seed: None, version: ENGINE_VERSION.to_owned() }
    }
}

impl SolverFingerprint {
    pub fn with_all_different(mut self, strength: AllDifferentStrength) -> Self {
        self.all_different = strength;
        self
    }

    pub fn with_order_seed(mut self, seed: Option<u64>) -> Self {
        self.order_seed = seed;
        self
    }

    pub fn digest(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("fingerprint serializes");
        Sha256::digest(&canonical).into()
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest())
    }
}
