use std::io::{Read, Write};
use std::path::Path;

use crate::cp::SolverFingerprint;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"TDCPVTAB";
const FORMAT_VERSION: u32 = 1;

/// State-value estimates indexed by hash slot, tagged with the solver
/// fingerprint and Zobrist seed they were learned under.
///
/// On disk: magic `TDCPVTAB`, format version (u32), slot count H (u64),
/// Zobrist seed (u64), SHA-256 fingerprint digest (32 bytes), then H
/// little-endian f64 values. All integers are little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    values: Vec<f64>,
    fingerprint: [u8; 32],
    zobrist_seed: u64,
}

impl ValueTable {
    pub fn new(hash_size: usize, fingerprint: &SolverFingerprint, zobrist_seed: u64) -> Self {
        ValueTable { values: vec![0.0; hash_size], fingerprint: fingerprint.digest(), zobrist_seed }
    }

    #[inline]
    pub fn get(&self, slot: usize) -> f64 {
        self.values[slot]
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zobrist_seed(&self) -> u64 {
        self.zobrist_seed
    }

    pub fn fingerprint_digest(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn matches(&self, fingerprint: &SolverFingerprint) -> bool {
        self.fingerprint == fingerprint.digest()
    }

    pub(crate) fn ensure_matches(&self, fingerprint: &SolverFingerprint) -> Result<()> {
        if self.matches(fingerprint) {
            Ok(())
        } else {
            Err(Error::FingerprintMismatch { expected: fingerprint.digest_hex(), found: hex::encode(self.fingerprint) })
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        w.write_all(&self.zobrist_seed.to_le_bytes())?;
        w.write_all(&self.fingerprint)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a table, refusing one learned under a different solver.
    pub fn read_from(mut r: impl Read, fingerprint: &SolverFingerprint) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::TableFormat("bad magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::TableFormat(format!("unsupported version {version}")));
        }
        let mut long = [0u8; 8];
        r.read_exact(&mut long)?;
        let len = u64::from_le_bytes(long) as usize;
        r.read_exact(&mut long)?;
        let zobrist_seed = u64::from_le_bytes(long);
        let mut digest = [0u8; 32];
        r.read_exact(&mut digest)?;
        let table = ValueTable { values: Vec::new(), fingerprint: digest, zobrist_seed };
        table.ensure_matches(fingerprint)?;
        let mut bytes = vec![0u8; len * 8];
        r.read_exact(&mut bytes)?;
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(ValueTable { values, ..table })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, fingerprint: &SolverFingerprint) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?), fingerprint)
    }
}
