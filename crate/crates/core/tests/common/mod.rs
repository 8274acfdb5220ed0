#![allow(dead_code)]

use tdcp::benchmarks::{build_disaster, BudgetChoice, DisasterOptions, PenaltyChoice};
use tdcp::network::{Link, Network, OdPair, Penalties, NETWORK_FORMAT_VERSION};
use tdcp::{Model, Plan, VarId};

/// Two parallel links between nodes 0 and 1, lengths 1 and 2, survival 0.5
/// uninvested and 0.9 invested, unit costs.
pub fn toy_network() -> Network {
    let link = |id, t| Link { id, from: 0, to: 1, t, c: 1, p: 0.5, q: 0.9 };
    Network {
        version: NETWORK_FORMAT_VERSION,
        nodes: vec![0, 1],
        links: vec![link(1, 1.0), link(2, 2.0)],
        od_pairs: vec![OdPair { from: 0, to: 1 }],
        budgets: [1, 2, 3],
        penalties: Penalties { low: 10.0, high: 40.0 },
    }
}

pub fn toy_options() -> DisasterOptions {
    DisasterOptions { budget: BudgetChoice::Level(1), penalty: PenaltyChoice::Explicit(10.0), ..Default::default() }
}

pub fn toy_model() -> Model {
    build_disaster(&toy_network(), &toy_options()).unwrap()
}

/// Plan investing exactly in the links with the given ids.
pub fn invest(model: &Model, ids: &[u32]) -> Plan {
    Plan::new(
        model
            .first_stage_decisions()
            .into_iter()
            .map(|v| {
                let id: u32 = model.variable(v).name.trim_start_matches("y_").parse().unwrap();
                (v, ids.contains(&id) as i64)
            })
            .collect(),
    )
}

/// Plan assigning `values` to the first-stage decisions in declaration order.
pub fn plan_of(model: &Model, values: &[i64]) -> Plan {
    let vars: Vec<VarId> = model.first_stage_decisions();
    assert_eq!(vars.len(), values.len());
    Plan::new(vars.into_iter().zip(values.iter().copied()).collect())
}

pub fn permutations(n: i64) -> Vec<Vec<i64>> {
    fn go(rest: &mut Vec<i64>, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (1..=n).collect(), &mut Vec::new(), &mut out);
    out
}
