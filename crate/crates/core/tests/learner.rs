mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tdcp::benchmarks::{build_artificial, build_disaster, gen_network, DisasterOptions};
use tdcp::eval::{exact_eval, exhaustive_opt, DEFAULT_SCENARIO_LIMIT};
use tdcp::learn::{td_update, EpisodeTrace, EpsilonSchedule, Learner, LearnerConfig, Policy, Seeds, Truncation};
use tdcp::model::{Distribution, Expr, Objective, ObjectiveMode, Pmf, Stage, Variable};
use tdcp::{ConstraintSpec, Domain, Limits, Model, SolverFingerprint, ValueTable, VarId, VarKind};

fn config(episodes: u64, hash_size: usize, seed: u64) -> LearnerConfig {
    LearnerConfig { episodes, hash_size, seeds: Seeds::from_base(seed), eval_rollouts: 200, ..Default::default() }
}

fn rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    (ChaCha8Rng::seed_from_u64(seed), ChaCha8Rng::seed_from_u64(seed + 1000))
}

/// Decisions over small domains under all-different plus one uniform random
/// variable; the objective is the random value.
fn small_model(domains: &[Domain], all_different: bool) -> Model {
    let n = domains.len();
    let mut vars: Vec<Variable> = domains
        .iter()
        .enumerate()
        .map(|(i, d)| Variable { name: format!("x{i}"), kind: VarKind::Decision, domain: d.clone(), distribution: None })
        .collect();
    let r = VarId::random(n);
    vars.push(Variable {
        name: "r".into(),
        kind: VarKind::Random,
        domain: Domain::range(0, 3),
        distribution: Some(Distribution::Fixed { pmf: Pmf::uniform(&Domain::range(0, 3)) }),
    });
    let ds: Vec<VarId> = (0..n).map(VarId::decision).collect();
    let constraints = if all_different { vec![ConstraintSpec::AllDifferent { vars: ds.clone() }] } else { vec![] };
    let stages = vec![Stage { decisions: ds, randoms: vec![r], computed: vec![] }];
    Model::new("small", vars, constraints, Objective::maximize(Expr::Var(r)), stages).unwrap()
}

#[test]
fn forced_wipe_out_truncates_after_one_assignment() {
    let model = small_model(&[Domain::singleton(1), Domain::singleton(1)], true);
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 101, 0)).unwrap();
    let values = learner.new_table();
    let (mut a, mut b) = rngs(0);
    for _ in 0..50 {
        let t = learner.run_episode(&values, Policy::Explore { epsilon: 0.3 }, &mut a, &mut b).unwrap();
        assert_eq!(t.truncation, Some(Truncation::WipeOut));
        assert_eq!(t.rewards, vec![learner.k_reward()]);
        assert_eq!(t.terminal_reward, 0.0);
        assert!(t.objective.is_none());
    }
    assert!(matches!(learner.extract_plan(&values), Err(tdcp::Error::NoPlan { .. })));
}

#[test]
fn full_exploration_is_uniform() {
    let model = build_artificial(3).unwrap();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 10_007, 0)).unwrap();
    let values = learner.new_table();
    let (mut a, mut b) = rngs(5);
    let episodes = 100_000;
    let mut first = [0u32; 3];
    let mut second_given_first_one = [0u32; 3];
    for _ in 0..episodes {
        let t = learner.run_episode(&values, Policy::Explore { epsilon: 1.0 }, &mut a, &mut b).unwrap();
        let d1 = t.assignments[0].1;
        first[d1 as usize - 1] += 1;
        if d1 == 1 {
            second_given_first_one[t.assignments[1].1 as usize - 1] += 1;
        }
    }
    let within_5_sigma = |count: u32, n: f64, p: f64| ((count as f64) - n * p).abs() <= 5.0 * (n * p * (1.0 - p)).sqrt();
    for &c in &first {
        assert!(within_5_sigma(c, episodes as f64, 1.0 / 3.0), "{first:?}");
    }
    let n1 = first[0] as f64;
    assert_eq!(second_given_first_one[0], 0);
    assert!(within_5_sigma(second_given_first_one[1], n1, 0.5), "{second_given_first_one:?}");
}

#[test]
fn completed_episodes_dominate_truncated_ones() {
    // x0 = 3 completes; x0 in {1, 2} wipes out at x1 or x2.
    let model = small_model(&[Domain::range(1, 3), Domain::range(1, 2), Domain::range(1, 2)], true);
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 1009, 0)).unwrap();
    let values = learner.new_table();
    let (mut a, mut b) = rngs(8);
    let traces: Vec<EpisodeTrace> =
        (0..500).map(|_| learner.run_episode(&values, Policy::Explore { epsilon: 1.0 }, &mut a, &mut b).unwrap()).collect();
    let done: Vec<&EpisodeTrace> = traces.iter().filter(|t| !t.truncated()).collect();
    let cut: Vec<&EpisodeTrace> = traces.iter().filter(|t| t.truncated()).collect();
    assert!(!done.is_empty() && !cut.is_empty());
    for d in &done {
        for c in &cut {
            assert!(c.rewards.len() < d.rewards.len());
            assert!(d.total_reward() > c.total_reward());
        }
    }
}

proptest! {
    #[test]
    fn k_dominance(bound in 0.0f64..1e6, slack in 1e-6f64..10.0, frac in -0.999f64..0.999, n in 1usize..60, cut in 0usize..60) {
        let k = bound + slack;
        let r = frac * bound;
        let truncated = cut % n;
        let done = EpisodeTrace { states: vec![0; n + 1], rewards: vec![k; n], assignments: vec![], objective: Some(r), terminal_reward: r, truncation: None };
        let short = EpisodeTrace {
            states: vec![0; truncated + 1], rewards: vec![k; truncated], assignments: vec![], objective: None, terminal_reward: 0.0,
            truncation: Some(Truncation::WipeOut),
        };
        prop_assert!(done.total_reward() > short.total_reward());
    }
}

#[test]
fn k_must_exceed_objective_bound() {
    let model = build_artificial(4).unwrap();
    let fp = SolverFingerprint::default();
    assert!(Learner::new(&model, fp.clone(), LearnerConfig { k_reward: Some(6.0), ..Default::default() }).is_err());
    assert!(Learner::new(&model, fp.clone(), LearnerConfig { k_reward: Some(6.5), ..Default::default() }).is_ok());
    let l = Learner::new(&model, fp, LearnerConfig::default()).unwrap();
    assert_eq!(l.k_reward(), 7.0);
}

#[test]
fn sense_symmetry() {
    let model = build_artificial(4).unwrap();
    let mut negated = model.clone();
    let ObjectiveMode::Expectation { expr } = &model.objective.mode else { unreachable!() };
    negated.objective = Objective::minimize(Expr::Product(vec![Expr::Const(-1.0), expr.clone()]));
    negated.validate().unwrap();
    for seed in 0..3 {
        let cfg = LearnerConfig { checkpoints: vec![500, 2000], ..config(2000, 5003, seed) };
        let a = Learner::new(&model, SolverFingerprint::default(), cfg.clone()).unwrap();
        let b = Learner::new(&negated, SolverFingerprint::default(), cfg).unwrap();
        let (ta, tb) = (a.train().unwrap(), b.train().unwrap());
        assert_eq!(ta.values.values(), tb.values.values());
        let (pa, pb) = (a.extract_plan(&ta.values).unwrap(), b.extract_plan(&tb.values).unwrap());
        assert_eq!(pa.plan.decisions, pb.plan.decisions);
        assert_eq!(pa.plan.estimated.unwrap(), -pb.plan.estimated.unwrap());
    }
}

#[test]
fn pruned_random_domain_halts_the_probe() {
    let (d, r) = (VarId::decision(0), VarId::random(1));
    let vars = vec![
        Variable { name: "d".into(), kind: VarKind::Decision, domain: Domain::range(1, 3), distribution: None },
        Variable {
            name: "r".into(),
            kind: VarKind::Random,
            domain: Domain::range(1, 3),
            distribution: Some(Distribution::Fixed { pmf: Pmf::uniform(&Domain::range(1, 3)) }),
        },
    ];
    let stages = vec![Stage { decisions: vec![d], randoms: vec![r], computed: vec![] }];
    let model =
        Model::new("halt", vars, vec![ConstraintSpec::ReifiedLe { lhs: d, rhs: r }], Objective::maximize(Expr::Var(r)), stages).unwrap();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 101, 0)).unwrap();
    let values = learner.new_table();
    let (mut a, mut b) = rngs(1);
    let mut halts = 0;
    for _ in 0..300 {
        let t = learner.run_episode(&values, Policy::Explore { epsilon: 1.0 }, &mut a, &mut b).unwrap();
        if t.assignments[0].1 > 1 {
            assert_eq!(t.truncation, Some(Truncation::IntegrityHalt));
            assert_eq!(t.assignments.len(), 1);
            halts += 1;
        } else {
            assert!(!t.truncated());
        }
    }
    assert!(halts > 0);
}

#[test]
fn disaster_toy_never_halts_on_integrity() {
    let model = common::toy_model();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 1009, 0)).unwrap();
    let values = learner.new_table();
    let (mut a, mut b) = rngs(2);
    for _ in 0..10_000 {
        let t = learner.run_episode(&values, Policy::Explore { epsilon: 1.0 }, &mut a, &mut b).unwrap();
        assert_ne!(t.truncation, Some(Truncation::IntegrityHalt));
    }
    let training = Learner::new(&model, SolverFingerprint::default(), config(10_000, 1009, 1)).unwrap().train().unwrap();
    assert_eq!(training.truncated_episodes, 0);
}

#[test]
fn extracted_plans_are_maximal_when_required() {
    let net = gen_network(6, 10, 2).unwrap();
    let model = build_disaster(&net, &DisasterOptions { maximality: true, ..Default::default() }).unwrap();
    let budget = net.budgets[0];
    for seed in 0..10 {
        let learner = Learner::new(&model, SolverFingerprint::default(), config(2000, 10_007, seed)).unwrap();
        let plan = learner.extract_plan(&learner.train().unwrap().values).unwrap().plan;
        let spent: i64 = net.links.iter().zip(plan.values()).map(|(l, y)| l.c * y).sum();
        assert!(spent <= budget);
        for (l, y) in net.links.iter().zip(plan.values()) {
            assert!(y == 1 || spent + l.c > budget, "seed {seed}: link {} affordable but uninvested", l.id);
        }
    }
}

#[test]
fn training_is_deterministic() {
    let model = build_artificial(4).unwrap();
    let cfg = LearnerConfig { checkpoints: LearnerConfig::even_checkpoints(3000, 6), ..config(3000, 5003, 7) };
    let run = || Learner::new(&model, SolverFingerprint::default(), cfg.clone()).unwrap().train().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.curve.len(), 6);
    let bits = |t: &ValueTable| t.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.values), bits(&b.values));
}

#[test]
fn zero_episodes_and_zero_alpha_leave_the_table_alone() {
    let model = build_artificial(3).unwrap();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(0, 1009, 0)).unwrap();
    let t = learner.train().unwrap();
    assert!(t.curve.is_empty());
    assert!(t.values.values().iter().all(|&v| v.to_bits() == 0));

    let frozen = LearnerConfig { alpha: 0.0, epsilon: EpsilonSchedule::constant(1.0), ..config(500, 1009, 0) };
    let t = Learner::new(&model, SolverFingerprint::default(), frozen).unwrap().train().unwrap();
    assert!(t.values.values().iter().all(|&v| v.to_bits() == 0));

    let trained = Learner::new(&model, SolverFingerprint::default(), config(300, 1009, 0)).unwrap().train().unwrap().values;
    let mut after = trained.clone();
    let (mut a, mut b) = rngs(3);
    for _ in 0..100 {
        let trace = learner.run_episode(&trained, Policy::Explore { epsilon: 1.0 }, &mut a, &mut b).unwrap();
        td_update(&mut after, &trace, 0.0);
    }
    let bits = |t: &ValueTable| t.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&after), bits(&trained));
}

#[test]
fn value_table_persists_and_rejects_other_solvers() {
    let model = build_artificial(3).unwrap();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(500, 1009, 0)).unwrap();
    let table = learner.train().unwrap().values;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a3.vtab");
    table.save(&path).unwrap();
    let back = ValueTable::load(&path, &SolverFingerprint::default()).unwrap();
    assert_eq!(back.values(), table.values());
    assert_eq!(learner.extract_plan(&back).unwrap(), learner.extract_plan(&table).unwrap());

    let cascade = SolverFingerprint::default().with_all_different(tdcp::AllDifferentStrength::Cascade);
    assert!(matches!(ValueTable::load(&path, &cascade), Err(tdcp::Error::FingerprintMismatch { .. })));
    let reordered = SolverFingerprint::default().with_order_seed(Some(3));
    assert!(ValueTable::load(&path, &reordered).is_err());
}

#[test]
fn untrained_greedy_plan_is_lexicographic() {
    let toy = common::toy_model();
    let learner = Learner::new(&toy, SolverFingerprint::default(), config(0, 101, 0)).unwrap();
    let plan = learner.extract_plan(&learner.new_table()).unwrap().plan;
    assert_eq!(plan.values(), vec![0, 0]);
}

#[test]
fn small_artificial_instances_are_learned() {
    let model = build_artificial(2).unwrap();
    let learner = Learner::new(&model, SolverFingerprint::default(), config(20_000, 10_007, 0)).unwrap();
    let ex = learner.extract_plan(&learner.train().unwrap().values).unwrap();
    assert_eq!(ex.plan.values(), vec![1, 2]);
    assert!((ex.plan.estimated.unwrap() - 1.0).abs() < 1e-12);

    let model = build_artificial(3).unwrap();
    let optimum = exhaustive_opt(&model, Limits::default()).unwrap().plan.decisions;
    let hits = (0..10)
        .filter(|&seed| {
            let cfg = LearnerConfig { eval_rollouts: 1000, ..config(50_000, 10_000, seed) };
            let learner = Learner::new(&model, SolverFingerprint::default(), cfg).unwrap();
            learner.extract_plan(&learner.train().unwrap().values).unwrap().plan.decisions == optimum
        })
        .count();
    assert!(hits >= 8, "only {hits}/10 seeds found the optimum");
}

#[test]
fn toy_estimate_agrees_with_exact_value() {
    let toy = common::toy_model();
    let cfg = LearnerConfig { eval_rollouts: 20_000, ..config(5000, 1009, 4) };
    let learner = Learner::new(&toy, SolverFingerprint::default(), cfg).unwrap();
    let ex = learner.extract_plan(&learner.train().unwrap().values).unwrap();
    let exact = exact_eval(&toy, &ex.plan, DEFAULT_SCENARIO_LIMIT).unwrap().value;
    assert!((ex.plan.estimated.unwrap() - exact).abs() <= 3.0 * ex.stderr, "{:?} vs {exact}", ex);
}
