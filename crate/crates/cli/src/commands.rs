use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use tdcp::benchmarks::{build_artificial, build_disaster, gen_network, load_network, DisasterOptions};
use tdcp::eval::{exact_eval, exhaustive_opt, mc_eval};
use tdcp::learn::{EpsilonSchedule, Learner, LearnerConfig, Seeds};
use tdcp::{Limits, Model, Plan, SolverFingerprint};

use crate::args::{Benchmark, BuildArgs, EvalArgs, EvalMode, GenNetworkArgs, ModelArgs, OracleArgs, SolverArgs, TrainArgs};
use crate::report::{self, ConfigEcho, EvalReport, Evaluation, RunReport, TrainReport};

/// Samples used when neither `--exact` nor `--mc` is given and the model is
/// too large to enumerate.
const DEFAULT_MC_SAMPLES: usize = 100_000;

/// A model together with a short description of where it came from.
pub struct LoadedModel {
    pub model: Model,
    pub source: String,
}

pub fn load_model(args: &ModelArgs) -> anyhow::Result<LoadedModel> {
    if let Some(path) = &args.model {
        let model = Model::load(path).with_context(|| format!("loading model {}", path.display()))?;
        return Ok(LoadedModel { model, source: path.display().to_string() });
    }
    match args.benchmark {
        Some(Benchmark::Artificial) => {
            let n = args.n.context("--benchmark artificial needs --n")?;
            Ok(LoadedModel { model: build_artificial(n)?, source: format!("artificial n={n}") })
        }
        Some(Benchmark::Disaster) => {
            let path = args.network.as_ref().context("--benchmark disaster needs --network")?;
            let network = load_network(path).with_context(|| format!("loading network {}", path.display()))?;
            let options = DisasterOptions {
                budget: args.budget.0,
                penalty: args.penalty.0,
                maximality: args.maximal,
                permutation_seed: args.permute_seed,
            };
            let (budget, penalty) = options.resolve(&network)?;
            let model = build_disaster(&network, &options)?;
            let mut source = format!("disaster {} budget={budget} penalty={penalty}", path.display());
            if args.maximal {
                source.push_str(" maximal");
            }
            if let Some(s) = args.permute_seed {
                source.push_str(&format!(" permute-seed={s}"));
            }
            Ok(LoadedModel { model, source })
        }
        None => bail!("give either --model or --benchmark"),
    }
}

fn fingerprint(args: &SolverArgs) -> SolverFingerprint {
    SolverFingerprint::default().with_all_different(args.all_different.into()).with_order_seed(args.order_seed)
}

enum Method {
    Exact,
    Mc(usize),
}

fn method(model: &Model, mode: &EvalMode) -> anyhow::Result<Option<Method>> {
    if mode.exact {
        let scenarios = model.scenario_count();
        if scenarios > mode.scenario_limit {
            return Err(tdcp::Error::TooManyScenarios { scenarios, limit: mode.scenario_limit }.into());
        }
        return Ok(Some(Method::Exact));
    }
    Ok(mode.mc.map(Method::Mc))
}

fn evaluate(model: &Model, plan: &Plan, method: &Method, limit: u128, seed: u64) -> tdcp::Result<Evaluation> {
    Ok(match *method {
        Method::Exact => {
            let e = exact_eval(model, plan, limit)?;
            Evaluation::Exact { value: e.value, scenarios: e.scenarios }
        }
        Method::Mc(samples) => {
            let e = mc_eval(model, plan, samples, seed)?;
            Evaluation::Mc { value: e.mean, stderr: e.stderr, samples: e.samples, seed }
        }
    })
}

pub fn train(args: &TrainArgs) -> anyhow::Result<TrainReport> {
    let LoadedModel { model, source } = load_model(&args.model)?;
    let fp = fingerprint(&args.solver);
    let method = method(&model, &args.eval)?;
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    if args.episodes == 0 {
        log::warn!("0 episodes: the value table stays at zero and the plan is the untrained greedy default");
    }
    let checkpoints = match &args.checkpoints {
        Some(list) => {
            let mut list = list.clone();
            list.retain(|&c| c <= args.episodes);
            list.sort_unstable();
            list.dedup();
            list
        }
        None => LearnerConfig::even_checkpoints(args.episodes, args.curve_points),
    };
    let base = LearnerConfig {
        episodes: args.episodes,
        alpha: args.alpha,
        epsilon: EpsilonSchedule {
            start: args.epsilon_start,
            end: args.epsilon_end,
            decay_fraction: args.epsilon_decay,
            shape: args.decay_shape.into(),
        },
        k_reward: args.k_reward,
        objective_bound: args.objective_bound,
        hash_size: args.hash_size,
        seeds: Seeds::from_base(args.seed),
        eval_rollouts: args.rollouts,
        checkpoints,
    };
    // Surfaces configuration errors (K, alpha, ...) before any work.
    let k = Learner::new(&model, fp.clone(), base.clone())?.k_reward();
    for dir in [&args.curve_out, &args.table_out].into_iter().flatten() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let outcomes: Vec<(RunReport, Option<Plan>)> = (0..args.runs)
        .into_par_iter()
        .map(|run| {
            let started = Instant::now();
            let seeds = Seeds::from_base(args.seed.wrapping_add(run as u64));
            let config = LearnerConfig { seeds, ..base.clone() };
            let mut report = RunReport {
                run,
                seeds,
                plan: None,
                invested_links: None,
                estimated: None,
                estimate_stderr: None,
                completed_rollouts: None,
                evaluation: None,
                truncated_episodes: 0,
                truncation_rate: 0.0,
                curve: Vec::new(),
                wall_time_s: None,
                error: None,
            };
            let result = (|| -> anyhow::Result<Option<Plan>> {
                let learner = Learner::new(&model, fp.clone(), config)?;
                let training = learner.train()?;
                report.truncated_episodes = training.truncated_episodes;
                report.truncation_rate = if args.episodes == 0 { 0.0 } else { training.truncated_episodes as f64 / args.episodes as f64 };
                report.curve = training.curve;
                if let Some(dir) = &args.table_out {
                    training.values.save(dir.join(format!("run-{run:02}.vtab")))?;
                }
                let extraction = learner.extract_plan(&training.values)?;
                let plan = extraction.plan;
                report.plan = Some(report::assignments(&model, &plan));
                report.invested_links = report::links_of(&model, &plan);
                report.estimated = plan.estimated;
                report.estimate_stderr = Some(extraction.stderr);
                report.completed_rollouts = Some(extraction.completed);
                if let Some(m) = &method {
                    report.evaluation = Some(evaluate(&model, &plan, m, args.eval.scenario_limit, args.eval_seed)?);
                }
                Ok(Some(plan))
            })();
            if args.timing {
                report.wall_time_s = Some(started.elapsed().as_secs_f64());
            }
            match result {
                Ok(plan) => (report, plan),
                Err(e) => {
                    report.error = Some(format!("{e:#}"));
                    (report, None)
                }
            }
        })
        .collect();

    let sense = model.objective.sense;
    let mut best: Option<(u32, f64)> = None;
    for (r, _) in &outcomes {
        if let Some(est) = r.estimated {
            if best.is_none_or(|(_, b)| sense.better(est, b)) {
                best = Some((r.run, est));
            }
        }
    }
    let (runs, plans): (Vec<RunReport>, Vec<Option<Plan>>) = outcomes.into_iter().unzip();
    if let Some(dir) = &args.curve_out {
        for r in &runs {
            report::write_curve(&dir.join(format!("run-{:02}.csv", r.run)), &r.curve)?;
        }
    }
    let report = TrainReport {
        model: model.name.clone(),
        source,
        sense,
        fingerprint: (&fp).into(),
        config: ConfigEcho {
            episodes: base.episodes,
            alpha: base.alpha,
            epsilon: base.epsilon,
            k_reward: k,
            hash_size: base.hash_size,
            eval_rollouts: base.eval_rollouts,
            checkpoints: base.checkpoints.clone(),
            base_seed: args.seed,
            runs: args.runs,
        },
        best_run: best.map(|(run, _)| run),
        runs,
    };
    if let Some(path) = &args.report_out {
        report::write_json(path, &report)?;
    }
    let best_plan = best.and_then(|(run, _)| plans[run as usize].clone());
    print!("{}", report::train_table(&report, best_plan.as_ref().map(|p| (&model, p))));
    let Some(mut plan) = best_plan else {
        let errors: Vec<String> = report.runs.iter().filter_map(|r| r.error.clone()).collect();
        bail!("all {} runs failed to extract a plan:\n  {}", args.runs, errors.join("\n  "));
    };
    if let Some(path) = &args.plan_out {
        plan.exact = report.runs[report.best_run.unwrap() as usize]
            .evaluation
            .as_ref()
            .and_then(|e| matches!(e, Evaluation::Exact { .. }).then(|| e.value()));
        std::fs::write(path, plan.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(report)
}

pub fn read_plan(path: &Path) -> anyhow::Result<Plan> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading plan {}", path.display()))?;
    Plan::from_json(&text).with_context(|| format!("parsing plan {}", path.display()))
}

pub fn eval(args: &EvalArgs) -> anyhow::Result<EvalReport> {
    let LoadedModel { model, source } = load_model(&args.model)?;
    let plan = read_plan(&args.plan)?;
    // Feasibility is reported before any limit or sampling question.
    tdcp::eval::check_plan(&model, &plan)?;
    let method = match method(&model, &args.eval)? {
        Some(m) => m,
        None if model.scenario_count() <= args.eval.scenario_limit => Method::Exact,
        None => {
            log::info!("{} scenarios exceed the exact limit; sampling {DEFAULT_MC_SAMPLES}", model.scenario_count());
            Method::Mc(DEFAULT_MC_SAMPLES)
        }
    };
    let evaluation = evaluate(&model, &plan, &method, args.eval.scenario_limit, args.seed)?;
    println!("{} ({})", model.name, source);
    println!("plan: {}", report::describe_plan(&model, &plan));
    if let Some(est) = plan.estimated {
        println!("estimated {est:.6}");
    }
    println!("evaluated {}", evaluation.describe());
    let report = EvalReport {
        model: model.name.clone(),
        source,
        plan: report::assignments(&model, &plan),
        invested_links: report::links_of(&model, &plan),
        evaluation,
    };
    if let Some(path) = &args.report_out {
        report::write_json(path, &report)?;
    }
    Ok(report)
}

pub fn oracle(args: &OracleArgs) -> anyhow::Result<()> {
    let LoadedModel { model, source } = load_model(&args.model)?;
    let limits = Limits { assignments: args.assignment_limit, scenarios: args.scenario_limit };
    let best = exhaustive_opt(&model, limits)?;
    println!("{} ({})", model.name, source);
    println!("optimal plan: {}", report::describe_plan(&model, &best.plan));
    println!("value {:.6} (best of {} feasible first-stage assignments)", best.value, best.feasible_plans);
    if let Some(path) = &args.plan_out {
        std::fs::write(path, best.plan.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn build(args: &BuildArgs) -> anyhow::Result<()> {
    let LoadedModel { model, source } = load_model(&args.model)?;
    model.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} ({source}) to {}", model.name, args.out.display());
    Ok(())
}

pub fn gen_network_cmd(args: &GenNetworkArgs) -> anyhow::Result<()> {
    let network = gen_network(args.nodes, args.links, args.seed)?;
    network.save(&args.out).with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} nodes, {} links, {} OD pairs to {} (budgets {:?}, penalties low={} high={})",
        network.nodes.len(),
        network.links.len(),
        network.od_pairs.len(),
        args.out.display(),
        network.budgets,
        network.penalties.low,
        network.penalties.high
    );
    Ok(())
}
