use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Decision,
    Random,
}

/// Identifies a variable of a model. The index is global over decision and
/// random variables; the kind is fixed when the model is built.
///
/// Serialized as `v<index>` for decision variables and `s<index>` for
/// stochastic ones.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    index: u32,
    kind: VarKind,
}

impl VarId {
    pub const fn new(index: usize, kind: VarKind) -> Self {
        VarId { index: index as u32, kind }
    }

    pub const fn decision(index: usize) -> Self {
        Self::new(index, VarKind::Decision)
    }

    pub const fn random(index: usize) -> Self {
        Self::new(index, VarKind::Random)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.index as usize
    }

    #[inline]
    pub fn kind(self) -> VarKind {
        self.kind
    }

    pub fn is_random(self) -> bool {
        self.kind == VarKind::Random
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Decision => write!(f, "v{}", self.index),
            VarKind::Random => write!(f, "s{}", self.index),
        }
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VarId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Model(format!("bad variable reference `{s}` (expected v<index> or s<index>)"));
        let (kind, rest) = match s.as_bytes().first() {
            Some(b'v') => (VarKind::Decision, &s[1..]),
            Some(b's') => (VarKind::Random, &s[1..]),
            _ => return Err(bad()),
        };
        let index: u32 = rest.parse().map_err(|_| bad())?;
        Ok(VarId { index, kind })
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of integers kept in strictly ascending order. The empty
/// domain is a wipe-out.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Domain {
    values: Vec<i64>,
}

impl Domain {
    /// Builds a domain from arbitrary values; duplicates are rejected.
    pub fn new(mut values: Vec<i64>) -> Result<Self> {
        values.sort_unstable();
        if values.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate values in {values:?}")));
        }
        Ok(Domain { values })
    }

    /// The inclusive range `lo..=hi`.
    pub fn range(lo: i64, hi: i64) -> Self {
        Domain { values: (lo..=hi).collect() }
    }

    pub fn singleton(value: i64) -> Self {
        Domain { values: vec![value] }
    }

    pub fn empty() -> Self {
        Domain { values: Vec::new() }
    }

    #[inline]
    pub fn values(&self) -> &[i64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn min(&self) -> Option<i64> {
        self.values.first().copied()
    }

    #[inline]
    pub fn max(&self) -> Option<i64> {
        self.values.last().copied()
    }

    /// The value of a singleton domain.
    pub fn fixed_value(&self) -> Option<i64> {
        match self.values.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    #[inline]
    pub fn contains(&self, value: i64) -> bool {
        self.position(value).is_some()
    }

    /// Position of `value` in ascending order.
    #[inline]
    pub fn position(&self, value: i64) -> Option<usize> {
        // Domains are small; a linear scan beats binary search here.
        self.values.iter().position(|&v| v == value)
    }

    /// Removes `value`; returns whether the domain changed.
    pub fn remove(&mut self, value: i64) -> bool {
        match self.position(value) {
            Some(i) => {
                self.values.remove(i);
                true
            }
            None => false,
        }
    }

    /// Keeps only the values accepted by `keep`; returns whether the domain changed.
    pub fn retain(&mut self, mut keep: impl FnMut(i64) -> bool) -> bool {
        let before = self.values.len();
        self.values.retain(|&v| keep(v));
        self.values.len() != before
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.values.iter().all(|&v| other.contains(v))
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<i64>::deserialize(deserializer)?;
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom(format!("domain values must be strictly ascending, got {values:?}")));
        }
        Ok(Domain { values })
    }
}
