mod common;

use proptest::prelude::*;
use tdcp::benchmarks::build_artificial;
use tdcp::model::Pmf;
use tdcp::{Model, VarId};

/// Every total random assignment of `model` with the given decision values.
fn scenarios(model: &Model, decisions: &[(VarId, i64)]) -> Vec<Vec<Option<i64>>> {
    let mut base = vec![None; model.num_vars()];
    for &(v, x) in decisions {
        base[v.index()] = Some(x);
    }
    let mut out = vec![base];
    for r in model.random_vars() {
        out = out
            .into_iter()
            .flat_map(|s| {
                model.domain(r).values().iter().map(move |&x| {
                    let mut s = s.clone();
                    s[r.index()] = Some(x);
                    s
                })
            })
            .collect();
    }
    out
}

#[test]
fn scenario_probabilities_sum_to_one() {
    let model = build_artificial(4).unwrap();
    let plan = common::plan_of(&model, &[2, 4, 1, 3]);
    let total: f64 = scenarios(&model, &plan.decisions).iter().map(|s| model.scenario_probability(s).unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-6);

    let net = tdcp::benchmarks::gen_network(5, 8, 3).unwrap();
    let model = tdcp::benchmarks::build_disaster(&net, &Default::default()).unwrap();
    for ids in [&[][..], &[1, 4], &[2, 3, 8]] {
        let plan = common::invest(&model, ids);
        let total: f64 = scenarios(&model, &plan.decisions).iter().map(|s| model.scenario_probability(s).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }
}

#[test]
fn independent_marginals_multiply() {
    let mut net = common::toy_network();
    net.links[0].p = 0.9;
    net.links[0].q = 0.95;
    let model = tdcp::benchmarks::build_disaster(&net, &common::toy_options()).unwrap();
    let mut values = vec![Some(0); 4];
    values[2] = Some(1);
    values[3] = Some(1);
    assert!((model.scenario_probability(&values).unwrap() - 0.45).abs() < 1e-12);
}

#[test]
fn artificial_marginals_are_uniform() {
    let model = build_artificial(6).unwrap();
    for r in model.random_vars() {
        let pmf = model.resolve_pmf(r, &vec![None; model.num_vars()]).unwrap();
        for x in 1..=6 {
            assert!((pmf.probability(x) - 1.0 / 6.0).abs() < 1e-15);
        }
    }
}

#[test]
fn artificial_objective_examples() {
    let model = build_artificial(3).unwrap();
    let v = |d: [i64; 3], r: [i64; 3]| -> Vec<Option<i64>> { d.iter().chain(&r).map(|&x| Some(x)).collect() };
    assert_eq!(model.objective_value(&v([1, 2, 3], [1, 1, 1])).unwrap(), 2.0);
    let model = build_artificial(2).unwrap();
    for r1 in 1..=2 {
        for r2 in 1..=2 {
            assert_eq!(model.objective_value(&[Some(1), Some(2), Some(r1), Some(r2)]).unwrap(), 1.0);
        }
    }
    assert!(model.objective_value(&[Some(1), None, Some(1), Some(1)]).is_err());
}

#[test]
fn toy_recourse_penalty_when_disconnected() {
    let model = common::toy_model();
    assert_eq!(model.objective_value(&[Some(1), Some(0), Some(0), Some(0)]).unwrap(), 10.0);
    assert_eq!(model.objective_value(&[Some(1), Some(0), Some(0), Some(1)]).unwrap(), 2.0);
}

#[test]
fn model_round_trips_through_file() {
    let model = build_artificial(3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a3.json");
    model.save(&path).unwrap();
    assert_eq!(Model::load(&path).unwrap(), model);

    let toy = common::toy_model();
    assert_eq!(Model::from_json(&toy.to_json()).unwrap(), toy);
}

#[test]
fn malformed_models_are_rejected() {
    let text = build_artificial(2).unwrap().to_json();
    assert!(Model::from_json(&text).is_ok());
    assert!(Model::from_json(&text.replacen("0.5", "0.7", 1)).is_err(), "pmf not summing to one");
    assert!(Model::from_json(&text.replace("\"version\": 1", "\"version\": 9")).is_err());
    assert!(Model::from_json(&text.replacen("\"name\"", "\"nmae\"", 1)).is_err());
    assert!(Pmf::new(vec![(1, 0.3), (2, 0.3)]).is_err());
    assert!(Pmf::bernoulli(1.5).is_err());
}

#[test]
fn stage_order_examples() {
    let model = build_artificial(10).unwrap();
    let natural = model.stage_variable_order(None);
    assert_eq!(natural, (0..20).map(|i| model.var_id(i)).collect::<Vec<_>>());
    let a = model.stage_variable_order(Some(1));
    assert_eq!(a, model.stage_variable_order(Some(1)));
    let b = model.stage_variable_order(Some(2));
    assert_ne!(a, b);
    let sorted = |mut v: Vec<VarId>| {
        v.sort();
        v
    };
    assert_eq!(sorted(a.clone()), sorted(b.clone()));
    assert_eq!(&a[10..], &natural[10..]);
}

proptest! {
    #[test]
    fn pmfs_sum_to_one(weights in prop::collection::vec(0.001f64..1.0, 1..12), p in 0.0f64..=1.0) {
        let total: f64 = weights.iter().sum();
        let pmf = Pmf::new(weights.iter().enumerate().map(|(i, w)| (i as i64, w / total)).collect()).unwrap();
        prop_assert!((pmf.pairs().iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);
        let b = Pmf::bernoulli(p).unwrap();
        prop_assert!((b.probability(0) + b.probability(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn endogenous_pmfs_follow_investment(p in 0.0f64..0.99, dq in 0.0f64..0.01) {
        let mut net = common::toy_network();
        net.links[0].p = p;
        net.links[0].q = p + dq;
        let model = tdcp::benchmarks::build_disaster(&net, &common::toy_options()).unwrap();
        let r = model.var_by_name("r_1").unwrap();
        for (y, surv) in [(0, p), (1, p + dq)] {
            let pmf = model.resolve_pmf(r, &[Some(y), Some(0), None, None]).unwrap();
            prop_assert!((pmf.probability(0) - (1.0 - surv)).abs() < 1e-12);
            prop_assert!((pmf.probability(0) + pmf.probability(1) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn failure_probability_examples() {
    let mut net = common::toy_network();
    net.links[0].p = 0.7;
    net.links[0].q = 0.95;
    let model = tdcp::benchmarks::build_disaster(&net, &common::toy_options()).unwrap();
    let r = model.var_by_name("r_1").unwrap();
    let fail = |y| model.resolve_pmf(r, &[Some(y), Some(0), None, None]).unwrap().probability(0);
    assert!((fail(0) - 0.3).abs() < 1e-12);
    assert!((fail(1) - 0.05).abs() < 1e-12);
}
