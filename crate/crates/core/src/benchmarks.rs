//! Builders for the two problem families: the artificial permutation problem
//! and the pre-disaster network investment problem.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp::{ConstraintSpec, Domain, ShortestPathSpec, VarId, VarKind};
use crate::error::{Error, Result};
use crate::eval::Plan;
use crate::model::{ConditionalCase, Distribution, Expr, Model, Objective, Pmf, Stage, Variable};
use crate::network::{Link, Network, OdPair, Penalties, NETWORK_FORMAT_VERSION};

/// Name of the second-stage recourse cost computed by the shortest-path constraint.
pub const RECOURSE_OUTPUT: &str = "z";

/// `n` decisions `d1..dn` and `n` uniform random variables `r1..rn` over
/// `1..=n`, all-different decisions, maximising `sum_{i<j} [d_i <= r_j]`.
pub fn build_artificial(n: usize) -> Result<Model> {
    if n < 2 {
        return Err(Error::Model(format!("artificial problem needs n >= 2, got {n}")));
    }
    let domain = Domain::range(1, n as i64);
    let d = |i: usize| VarId::decision(i);
    let r = |j: usize| VarId::random(n + j);
    let mut variables: Vec<Variable> = (0..n)
        .map(|i| Variable { name: format!("d{}", i + 1), kind: VarKind::Decision, domain: domain.clone(), distribution: None })
        .collect();
    variables.extend((0..n).map(|j| Variable {
        name: format!("r{}", j + 1),
        kind: VarKind::Random,
        domain: domain.clone(),
        distribution: Some(Distribution::Fixed { pmf: Pmf::uniform(&domain) }),
    }));
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            terms.push(Expr::reify(ConstraintSpec::ReifiedLe { lhs: d(i), rhs: r(j) }));
        }
    }
    let constraints = vec![ConstraintSpec::AllDifferent { vars: (0..n).map(d).collect() }];
    let stages = vec![Stage { decisions: (0..n).map(d).collect(), randoms: (0..n).map(r).collect(), computed: vec![] }];
    Model::new(format!("artificial-{n}"), variables, constraints, Objective::maximize(Expr::Sum(terms)), stages)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetChoice {
    /// One of the network's three budget levels, 1-based.
    Level(u8),
    Explicit(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyChoice {
    Low,
    High,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisasterOptions {
    pub budget: BudgetChoice,
    pub penalty: PenaltyChoice,
    /// Only allow plans where no uninvested link is still affordable.
    pub maximality: bool,
    /// Shuffles the order in which investment decisions are made.
    pub permutation_seed: Option<u64>,
}

impl Default for DisasterOptions {
    fn default() -> Self {
        DisasterOptions { budget: BudgetChoice::Level(1), penalty: PenaltyChoice::Low, maximality: false, permutation_seed: None }
    }
}

impl DisasterOptions {
    pub fn resolve(&self, network: &Network) -> Result<(i64, f64)> {
        let budget = match self.budget {
            BudgetChoice::Level(l @ 1..=3) => network.budgets[l as usize - 1],
            BudgetChoice::Level(l) => return Err(Error::Model(format!("budget level {l} is not one of 1, 2, 3"))),
            BudgetChoice::Explicit(b) if b > 0 => b,
            BudgetChoice::Explicit(b) => return Err(Error::Model(format!("budget {b} must be positive"))),
        };
        let penalty = match self.penalty {
            PenaltyChoice::Low => network.penalties.low,
            PenaltyChoice::High => network.penalties.high,
            PenaltyChoice::Explicit(m) if m.is_finite() && m > 0.0 => m,
            PenaltyChoice::Explicit(m) => return Err(Error::Model(format!("penalty {m} must be positive"))),
        };
        Ok((budget, penalty))
    }
}

/// Two-stage investment model: binary `y_<id>` (invest) and `r_<id>`
/// (survives) per link, budget `sum c_e y_e <= B`, survival probability `q_e`
/// if invested and `p_e` otherwise, and a second-stage shortest-path cost `z`
/// to minimise in expectation.
pub fn build_disaster(network: &Network, options: &DisasterOptions) -> Result<Model> {
    network.validate()?;
    let (budget, penalty) = options.resolve(network)?;
    let total_length = network.total_length();
    if penalty <= total_length {
        log::warn!("penalty {penalty} does not exceed the total link length {total_length}; a connected path may cost more than M");
    }
    let e = network.links.len();
    let y = |i: usize| VarId::decision(i);
    let r = |i: usize| VarId::random(e + i);
    let binary = Domain::range(0, 1);
    let mut variables: Vec<Variable> = network
        .links
        .iter()
        .map(|l| Variable { name: format!("y_{}", l.id), kind: VarKind::Decision, domain: binary.clone(), distribution: None })
        .collect();
    for (i, l) in network.links.iter().enumerate() {
        // failure probability f_e = y_e (1 - q_e) + (1 - y_e)(1 - p_e)
        let cases = vec![ConditionalCase { when: 0, pmf: Pmf::bernoulli(l.p)? }, ConditionalCase { when: 1, pmf: Pmf::bernoulli(l.q)? }];
        variables.push(Variable {
            name: format!("r_{}", l.id),
            kind: VarKind::Random,
            domain: binary.clone(),
            distribution: Some(Distribution::Conditional { on: y(i), cases }),
        });
    }
    let ys: Vec<VarId> = (0..e).map(y).collect();
    let rs: Vec<VarId> = (0..e).map(r).collect();
    let costs: Vec<i64> = network.links.iter().map(|l| l.c).collect();
    let mut constraints = vec![ConstraintSpec::LinearLe { coeffs: costs.clone(), vars: ys.clone(), bound: budget }];
    if options.maximality {
        constraints.push(ConstraintSpec::MaximalityGuard { costs, vars: ys.clone(), budget });
    }
    constraints.push(ConstraintSpec::ShortestPathCost(ShortestPathSpec {
        penalty,
        graph: network.recourse_graph(&rs),
        output: RECOURSE_OUTPUT.to_owned(),
    }));

    let mut decisions = ys;
    if let Some(seed) = options.permutation_seed {
        decisions.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let stages = vec![
        Stage { decisions, randoms: rs, computed: vec![] },
        Stage { decisions: vec![], randoms: vec![], computed: vec![RECOURSE_OUTPUT.to_owned()] },
    ];
    Model::new("pre-disaster", variables, constraints, Objective::minimize(Expr::Output(RECOURSE_OUTPUT.to_owned())), stages)
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network> {
    Network::load(path)
}

/// Link ids invested in by a plan on a disaster model, ascending.
pub fn invested_links(model: &Model, plan: &Plan) -> Vec<u32> {
    let mut ids: Vec<u32> = plan
        .decisions
        .iter()
        .filter(|&&(_, value)| value == 1)
        .filter_map(|&(var, _)| model.variable(var).name.strip_prefix("y_")?.parse().ok())
        .collect();
    ids.sort_unstable();
    ids
}

/// A connected random network with `n` nodes and `m` undirected links:
/// a random spanning tree plus extra distinct links.
pub fn gen_network(n: usize, m: usize, seed: u64) -> Result<Network> {
    if n < 2 {
        return Err(Error::Network(format!("need at least 2 nodes, got {n}")));
    }
    if m + 1 < n {
        return Err(Error::Network(format!("{m} links cannot connect {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(m);
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((parent, order[i]));
    }
    let max_simple = n * (n - 1) / 2;
    while edges.len() < m {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a == b {
            continue;
        }
        let exists = edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a));
        // Parallel links only once every simple pair is used.
        if exists && edges.len() < max_simple {
            continue;
        }
        edges.push((a.min(b), a.max(b)));
    }

    let links: Vec<Link> = edges
        .into_iter()
        .enumerate()
        .map(|(i, (from, to))| {
            let p = (rng.random_range(30..=80) as f64) / 100.0;
            let q = ((p * 100.0) as i64 + rng.random_range(10..=(99 - (p * 100.0) as i64).max(10))).min(99) as f64 / 100.0;
            Link { id: i as u32 + 1, from, to, t: rng.random_range(1..=20) as f64, c: rng.random_range(1..=10), p, q }
        })
        .collect();

    let pairs = 5.min(max_simple);
    let mut od_pairs: Vec<OdPair> = Vec::with_capacity(pairs);
    while od_pairs.len() < pairs {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a != b && !od_pairs.iter().any(|p| (p.from, p.to) == (a, b) || (p.from, p.to) == (b, a)) {
            od_pairs.push(OdPair { from: a, to: b });
        }
    }

    let total_cost: i64 = links.iter().map(|l| l.c).sum();
    let mut budgets = [total_cost / 4, total_cost / 2, total_cost * 3 / 4];
    budgets[0] = budgets[0].max(1);
    budgets[1] = budgets[1].max(budgets[0] + 1);
    budgets[2] = budgets[2].max(budgets[1] + 1);
    let low = links.iter().map(|l| l.t).sum::<f64>() + 1.0;
    let network = Network {
        version: NETWORK_FORMAT_VERSION,
        nodes: (0..n as u32).collect(),
        links,
        od_pairs,
        budgets,
        penalties: Penalties { low, high: 4.0 * low },
    };
    network.validate()?;
    Ok(network)
}
