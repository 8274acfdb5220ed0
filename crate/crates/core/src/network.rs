//! Transportation networks and the shortest-path recourse.
//!
//! A [`Network`] is the data of a pre-disaster investment instance: links with
//! lengths, investment costs and survival probabilities, the origin/destination
//! pairs whose connectivity matters, and the budget and penalty levels. Once
//! the survival of every link is known, the second-stage cost is the sum over
//! the OD pairs of the shortest surviving path, with a penalty `M` for every
//! disconnected pair.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cp::VarId;
use crate::error::{Error, Result};

pub const NETWORK_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub id: u32,
    pub from: u32,
    pub to: u32,
    /// Travel length.
    pub t: f64,
    /// Investment cost.
    pub c: i64,
    /// Survival probability without investment.
    pub p: f64,
    /// Survival probability with investment.
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdPair {
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Penalties {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub version: u32,
    pub nodes: Vec<u32>,
    pub links: Vec<Link>,
    pub od_pairs: Vec<OdPair>,
    pub budgets: [i64; 3],
    pub penalties: Penalties,
}

impl Network {
    /// Checks every structural invariant. Errors name the offending link or pair.
    pub fn validate(&self) -> Result<()> {
        if self.version != NETWORK_FORMAT_VERSION {
            return Err(Error::Network(format!("unsupported format version {} (expected {NETWORK_FORMAT_VERSION})", self.version)));
        }
        let mut nodes = BTreeSet::new();
        for &n in &self.nodes {
            if !nodes.insert(n) {
                return Err(Error::Network(format!("duplicate node {n}")));
            }
        }
        if self.links.is_empty() {
            return Err(Error::Network("network has no links".into()));
        }
        let mut ids = BTreeSet::new();
        for link in &self.links {
            let id = link.id;
            if !ids.insert(id) {
                return Err(Error::Network(format!("duplicate link id {id}")));
            }
            for end in [link.from, link.to] {
                if !nodes.contains(&end) {
                    return Err(Error::Network(format!("link {id}: unknown node {end}")));
                }
            }
            if !(link.t.is_finite() && link.t >= 0.0) {
                return Err(Error::Network(format!("link {id}: length t={} must be finite and >= 0", link.t)));
            }
            if link.c < 0 {
                return Err(Error::Network(format!("link {id}: cost c={} must be >= 0", link.c)));
            }
            for (name, prob) in [("p", link.p), ("q", link.q)] {
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::Network(format!("link {id}: {name}={prob} outside [0,1]")));
                }
            }
            if link.q < link.p {
                return Err(Error::Network(format!("link {id}: survival with investment q={} is below p={}", link.q, link.p)));
            }
        }
        if self.od_pairs.is_empty() {
            return Err(Error::Network("network has no OD pairs".into()));
        }
        for (i, pair) in self.od_pairs.iter().enumerate() {
            for end in [pair.from, pair.to] {
                if !nodes.contains(&end) {
                    return Err(Error::Network(format!("OD pair #{i}: unknown node {end}")));
                }
            }
        }
        let [b1, b2, b3] = self.budgets;
        if !(0 < b1 && b1 < b2 && b2 < b3) {
            return Err(Error::Network(format!("budgets {:?} must be positive and strictly ascending", self.budgets)));
        }
        let Penalties { low, high } = self.penalties;
        if !(low.is_finite() && high.is_finite() && 0.0 < low && low < high) {
            return Err(Error::Network(format!("penalties low={low}, high={high} must satisfy 0 < low < high")));
        }
        Ok(())
    }

    /// Reads and validates a network file.
    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(err) => Error::NetworkSchema { path: path.display().to_string(), message: err.to_string() },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let network: Network = serde_json::from_str(text)?;
        network.validate()?;
        Ok(network)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn link_index(&self, id: u32) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn total_cost(&self) -> i64 {
        self.links.iter().map(|l| l.c).sum()
    }

    pub fn total_length(&self) -> f64 {
        self.links.iter().map(|l| l.t).sum()
    }

    /// The recourse graph whose link `i` survives iff `survival[i]` is 1.
    pub fn recourse_graph(&self, survival: &[VarId]) -> RecourseGraph {
        assert_eq!(survival.len(), self.links.len());
        let node_index = |n: u32| self.nodes.iter().position(|&m| m == n).expect("validated node");
        RecourseGraph {
            nodes: self.nodes.len(),
            links: self
                .links
                .iter()
                .zip(survival)
                .map(|(l, &var)| RecourseLink { from: node_index(l.from), to: node_index(l.to), length: l.t, survival: var })
                .collect(),
            od_pairs: self.od_pairs.iter().map(|p| (node_index(p.from), node_index(p.to))).collect(),
        }
    }
}

/// Sum over OD pairs of the shortest path length using only surviving links,
/// with `penalty` for each pair left disconnected.
pub fn shortest_path_cost(network: &Network, survives: &[bool], penalty: f64) -> f64 {
    assert_eq!(survives.len(), network.links.len(), "scenario must assign every link");
    let ids: Vec<VarId> = (0..network.links.len()).map(VarId::random).collect();
    let graph = network.recourse_graph(&ids);
    let router = Router::new(&graph);
    router.total_cost(|link| survives[link], penalty, &mut Vec::new())
}

/// Undirected link of a recourse graph; nodes are dense indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseLink {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// Binary random variable, 1 when the link survives.
    pub survival: VarId,
}

/// The graph part of a shortest-path recourse constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseGraph {
    pub nodes: usize,
    pub links: Vec<RecourseLink>,
    pub od_pairs: Vec<(usize, usize)>,
}

impl RecourseGraph {
    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.links.iter().enumerate() {
            if l.from >= self.nodes || l.to >= self.nodes {
                return Err(Error::Model(format!("recourse link #{i} references a node outside 0..{}", self.nodes)));
            }
            if !(l.length.is_finite() && l.length >= 0.0) {
                return Err(Error::Model(format!("recourse link #{i} has invalid length {}", l.length)));
            }
        }
        for &(s, t) in &self.od_pairs {
            if s >= self.nodes || t >= self.nodes {
                return Err(Error::Model(format!("OD pair ({s},{t}) outside 0..{}", self.nodes)));
            }
        }
        Ok(())
    }

    /// Longest possible per-pair contribution: a simple path never exceeds the
    /// sum of all lengths, and a disconnected pair costs `penalty`.
    pub fn cost_bound(&self, penalty: f64) -> f64 {
        let total: f64 = self.links.iter().map(|l| l.length).sum();
        self.od_pairs.len() as f64 * total.max(penalty)
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Precomputed adjacency for repeated shortest-path queries on one graph.
#[derive(Debug, Clone)]
pub struct Router {
    offsets: Vec<usize>,
    // (neighbour, link index, length)
    arcs: Vec<(usize, usize, f64)>,
    // OD pairs grouped by source
    queries: Vec<(usize, Vec<usize>)>,
}

impl Router {
    pub fn new(graph: &RecourseGraph) -> Self {
        let mut degree = vec![0usize; graph.nodes + 1];
        for l in &graph.links {
            degree[l.from] += 1;
            degree[l.to] += 1;
        }
        let mut offsets = vec![0usize; graph.nodes + 1];
        for n in 0..graph.nodes {
            offsets[n + 1] = offsets[n] + degree[n];
        }
        let mut fill = offsets.clone();
        let mut arcs = vec![(0, 0, 0.0); offsets[graph.nodes]];
        for (i, l) in graph.links.iter().enumerate() {
            arcs[fill[l.from]] = (l.to, i, l.length);
            fill[l.from] += 1;
            arcs[fill[l.to]] = (l.from, i, l.length);
            fill[l.to] += 1;
        }
        let mut queries: Vec<(usize, Vec<usize>)> = Vec::new();
        for &(s, t) in &graph.od_pairs {
            match queries.iter_mut().find(|(src, _)| *src == s) {
                Some((_, sinks)) => sinks.push(t),
                None => queries.push((s, vec![t])),
            }
        }
        Router { offsets, arcs, queries }
    }

    /// Dijkstra from each distinct source over the links accepted by `alive`.
    /// `dist` is scratch space reused across calls.
    pub fn total_cost(&self, alive: impl Fn(usize) -> bool, penalty: f64, dist: &mut Vec<f64>) -> f64 {
        let n = self.offsets.len() - 1;
        let mut total = 0.0;
        let mut heap = BinaryHeap::new();
        for (source, sinks) in &self.queries {
            dist.clear();
            dist.resize(n, f64::INFINITY);
            dist[*source] = 0.0;
            heap.clear();
            heap.push(HeapEntry { dist: 0.0, node: *source });
            while let Some(HeapEntry { dist: d, node }) = heap.pop() {
                if d > dist[node] {
                    continue;
                }
                for &(next, link, len) in &self.arcs[self.offsets[node]..self.offsets[node + 1]] {
                    if !alive(link) {
                        continue;
                    }
                    let nd = d + len;
                    if nd < dist[next] {
                        dist[next] = nd;
                        heap.push(HeapEntry { dist: nd, node: next });
                    }
                }
            }
            for &sink in sinks {
                total += if dist[sink].is_finite() { dist[sink] } else { penalty };
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn network(nodes: Vec<u32>, links: Vec<(u32, u32, f64)>, od: Vec<(u32, u32)>) -> Network {
        Network {
            version: NETWORK_FORMAT_VERSION,
            nodes,
            links: links
                .into_iter()
                .enumerate()
                .map(|(i, (from, to, t))| Link { id: i as u32 + 1, from, to, t, c: 1, p: 0.5, q: 0.9 })
                .collect(),
            od_pairs: od.into_iter().map(|(from, to)| OdPair { from, to }).collect(),
            budgets: [1, 2, 3],
            penalties: Penalties { low: 10.0, high: 100.0 },
        }
    }

    #[test]
    fn single_link_up_and_down() {
        let net = network(vec![0, 1], vec![(0, 1, 1.0)], vec![(0, 1)]);
        assert_eq!(shortest_path_cost(&net, &[true], 10.0), 1.0);
        assert_eq!(shortest_path_cost(&net, &[false], 10.0), 10.0);
    }

    #[test]
    fn triangle_takes_two_hop_path() {
        // s=0, a=1, t=2
        let net = network(vec![0, 1, 2], vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)], vec![(0, 2)]);
        assert_eq!(shortest_path_cost(&net, &[true, true, true], 10.0), 2.0);
        assert_eq!(shortest_path_cost(&net, &[true, false, true], 10.0), 3.0);
    }

    #[test]
    fn penalty_is_charged_per_disconnected_pair() {
        let net = network(vec![0, 1, 2], vec![(0, 1, 1.0)], vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(shortest_path_cost(&net, &[true], 10.0), 1.0 + 10.0 + 10.0);
    }

    #[test]
    fn validation_names_the_offending_link() {
        let mut net = network(vec![0, 1], vec![(0, 1, 1.0)], vec![(0, 1)]);
        net.links[0].q = 0.1;
        let msg = net.validate().unwrap_err().to_string();
        assert!(msg.contains("link 1"), "{msg}");

        let mut net = network(vec![0, 1], vec![(0, 1, -1.0)], vec![(0, 1)]);
        assert!(net.validate().is_err());
        net.links[0].t = 1.0;
        net.od_pairs[0].to = 7;
        assert!(net.validate().unwrap_err().to_string().contains("unknown node 7"));
    }
}
