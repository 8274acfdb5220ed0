use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cp::VarId;
use crate::error::{Error, Result};
use crate::model::Model;

/// Fixed random 64-bit codes, one per (variable, value) pair of a model. The
/// key of a set of assignments is the XOR of their codes, and its slot in a
/// value table of `hash_size` entries is the key modulo `hash_size`.
#[derive(Debug, Clone)]
pub struct ZobristTable {
    // codes[var] = (value, code) for every value of the model domain
    codes: Vec<Vec<(i64, u64)>>,
    hash_size: usize,
    seed: u64,
}

impl ZobristTable {
    pub fn new(model: &Model, hash_size: usize, seed: u64) -> Result<Self> {
        if hash_size == 0 {
            return Err(Error::Config("hash table size must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let codes = model.variables.iter().map(|v| v.domain.values().iter().map(|&value| (value, rng.next_u64())).collect()).collect();
        Ok(ZobristTable { codes, hash_size, seed })
    }

    pub fn hash_size(&self) -> usize {
        self.hash_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn code(&self, var: VarId, value: i64) -> Result<u64> {
        self.codes
            .get(var.index())
            .and_then(|codes| codes.iter().find(|&&(v, _)| v == value))
            .map(|&(_, code)| code)
            .ok_or(Error::UnknownAssignment { var, value })
    }

    /// XOR of the codes of `assignments`; order does not matter.
    pub fn key(&self, assignments: &[(VarId, i64)]) -> Result<u64> {
        assignments.iter().try_fold(0u64, |key, &(var, value)| Ok(key ^ self.code(var, value)?))
    }

    #[inline]
    pub fn slot(&self, key: u64) -> usize {
        (key % self.hash_size as u64) as usize
    }

    /// Value-table slot of a set of assignments.
    pub fn state_hash(&self, assignments: &[(VarId, i64)]) -> Result<usize> {
        Ok(self.slot(self.key(assignments)?))
    }
}
