use super::domain::{Domain, VarId};

/// A partial assignment together with the filtered domain of every variable.
/// Owned by a single episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub(crate) domains: Vec<Domain>,
    pub(crate) values: Vec<Option<i64>>,
    pub(crate) assigned: Vec<(VarId, i64)>,
    pub(crate) outputs: Vec<(String, f64)>,
    pub(crate) wiped: bool,
}

impl SearchState {
    /// A state with nothing assigned. No propagation is performed.
    pub fn new(domains: Vec<Domain>) -> Self {
        let wiped = domains.iter().any(Domain::is_empty);
        let n = domains.len();
        SearchState { domains, values: vec![None; n], assigned: Vec::new(), outputs: Vec::new(), wiped }
    }

    #[inline]
    pub fn domain(&self, var: VarId) -> &Domain {
        &self.domains[var.index()]
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    #[inline]
    pub fn value(&self, var: VarId) -> Option<i64> {
        self.values[var.index()]
    }

    /// Assigned values indexed by variable.
    pub fn values(&self) -> &[Option<i64>] {
        &self.values
    }

    /// Assignments in the order they were made.
    pub fn assigned(&self) -> &[(VarId, i64)] {
        &self.assigned
    }

    #[inline]
    pub fn is_assigned(&self, var: VarId) -> bool {
        self.values[var.index()].is_some()
    }

    #[inline]
    pub fn wiped(&self) -> bool {
        self.wiped
    }

    /// Quantities computed by suspended constraints, such as a recourse cost.
    pub fn outputs(&self) -> &[(String, f64)] {
        &self.outputs
    }

    pub fn output(&self, name: &str) -> Option<f64> {
        self.outputs.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub(crate) fn set_output(&mut self, name: &str, value: f64) {
        match self.outputs.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.outputs.push((name.to_owned(), value)),
        }
    }
}
