use std::collections::BTreeSet;

use freeterm_core::distsim::{
    all_metadata_policy, ft_ready_policy, policy_aware_ft_policy, run_plain, run_policy_aware,
    run_with_all_metadata, DistQuery, DistributionPolicy, LocalView, Network, ReadyPolicy,
    RunSchedule, RunTrace,
};
use freeterm_core::relational::{active_domain, Const, Expr, Fact, Instance};
use rayon::prelude::*;
use serde_json::json;

use crate::cli::{Global, SimulateArgs};
use crate::gen::split_list;
use crate::io::{emit, load_json, write, CliResult, Failure, EXIT_FAIL};

/// `exists_R`, `not_exists_R`, or a full expression.
pub fn parse_query(text: &str) -> CliResult<Expr> {
    let expr = if let Some(rel) = text.strip_prefix("not_exists_") {
        format!("(not (exists {rel}))")
    } else if let Some(rel) = text.strip_prefix("exists_") {
        format!("(exists {rel})")
    } else {
        text.to_owned()
    };
    Ok(Expr::parse(&expr)?)
}

fn parse_const(text: &str) -> Const {
    text.parse()
        .map(Const::Int)
        .unwrap_or_else(|_| Const::Sym(text.to_owned()))
}

fn build_query(args: &SimulateArgs) -> CliResult<DistQuery> {
    let expr = parse_query(&args.query)?;
    Ok(match (&args.var, &args.outputs) {
        (Some(var), Some(outputs)) => DistQuery::Set {
            var: var.trim_start_matches('?').to_owned(),
            expr,
            outputs: split_list(outputs).iter().map(|o| parse_const(o)).collect(),
        },
        _ => DistQuery::Boolean(expr),
    })
}

/// Instance facts plus every ground fact the query mentions.
fn default_universe(query: &DistQuery, instance: &Instance) -> Vec<Fact> {
    let mut all: BTreeSet<Fact> = instance.clone();
    for e in query.slot_exprs() {
        all.extend(e.ground_facts());
    }
    all.into_iter().collect()
}

enum Setup {
    Plain(Vec<Fact>),
    AllMetadata(Vec<Fact>),
    Policy(DistributionPolicy),
}

/// Whether each slot's ready flag should fire once a node holds the whole
/// input (plus, with a policy, the negative facts it implies).
fn predicted_ready(setup: &Setup, query: &DistQuery, instance: &Instance) -> CliResult<Vec<bool>> {
    let empty = Instance::new();
    let (policy, neg, all): (Box<dyn ReadyPolicy>, Instance, bool) = match setup {
        Setup::Plain(u) => (Box::new(ft_ready_policy(query, u)?), empty, false),
        Setup::AllMetadata(u) => (Box::new(all_metadata_policy(query, u)?), empty, true),
        Setup::Policy(dist) => {
            let universe: Vec<Fact> = dist.facts().cloned().collect();
            let adom = active_domain(instance);
            let neg = universe
                .iter()
                .filter(|f| !instance.contains(f) && f.tuple.iter().all(|c| adom.contains(c)))
                .cloned()
                .collect();
            (
                Box::new(policy_aware_ft_policy(query, &universe)?),
                neg,
                false,
            )
        }
    };
    let view = LocalView {
        pos: instance,
        neg: &neg,
        all,
    };
    Ok((0..policy.slots())
        .map(|s| policy.ready(s, &view))
        .collect())
}

fn one_run(
    setup: &Setup,
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    schedule: &RunSchedule,
) -> freeterm_core::Result<RunTrace> {
    match setup {
        Setup::Plain(u) => run_plain(network, query, instance, u, schedule),
        Setup::AllMetadata(u) => run_with_all_metadata(network, query, instance, u, schedule),
        Setup::Policy(dist) => run_policy_aware(network, query, instance, dist, schedule),
    }
}

pub fn run(args: &SimulateArgs, global: &Global) -> CliResult<u8> {
    let network: Network = load_json(&args.network)?;
    network.validate()?;
    let facts: Vec<Fact> = load_json(&args.instance)?;
    let instance: Instance = facts.into_iter().collect();
    let query = build_query(args)?;
    let setup = if let Some(path) = &args.policy {
        Setup::Policy(load_json(path)?)
    } else {
        let universe = match &args.universe {
            Some(path) => load_json(path)?,
            None => default_universe(&query, &instance),
        };
        if args.all_metadata {
            Setup::AllMetadata(universe)
        } else {
            Setup::Plain(universe)
        }
    };
    if args.seeds == 0 {
        return Err(Failure::input("--seeds must be at least 1"));
    }
    let predicted = predicted_ready(&setup, &query, &instance)?;
    let seeds: Vec<u64> = (0..args.seeds)
        .map(|i| global.seed.wrapping_add(i))
        .collect();
    let schedule = |seed| RunSchedule {
        seed,
        random_steps: args.random_steps,
    };
    let traces: Vec<RunTrace> = if args.parallel_seeds {
        seeds
            .par_iter()
            .map(|&s| one_run(&setup, &network, &query, &instance, &schedule(s)))
            .collect::<freeterm_core::Result<_>>()?
    } else {
        seeds
            .iter()
            .map(|&s| one_run(&setup, &network, &query, &instance, &schedule(s)))
            .collect::<freeterm_core::Result<_>>()?
    };

    let slots = query.slot_names();
    let k = slots.len();
    let all_ready_runs: Vec<usize> = (0..k)
        .map(|s| traces.iter().filter(|t| t.all_ready(s)).count())
        .collect();
    let no_ready_runs: Vec<usize> = (0..k)
        .map(|s| traces.iter().filter(|t| t.none_ready(s)).count())
        .collect();
    let wrong: usize = traces.iter().map(RunTrace::wrong_ready).sum();
    let unconverged = traces.iter().filter(|t| !t.converged).count();
    let n = traces.len();
    let agree = wrong == 0
        && unconverged == 0
        && (0..k).all(|s| {
            if predicted[s] {
                all_ready_runs[s] == n
            } else {
                no_ready_runs[s] == n
            }
        });

    let runs: Vec<_> = traces
        .iter()
        .map(|t| {
            json!({
                "seed": t.seed,
                "all_ready": (0..k).map(|s| t.all_ready(s)).collect::<Vec<_>>(),
                "ready_nodes": (0..k).map(|s| t.ready.iter().filter(|r| r[s]).count()).collect::<Vec<_>>(),
                "quiescence_step": t.quiescence_step,
                "events": t.events.len(),
                "converged": t.converged,
                "coordination_used": t.coordination_used,
                "wrong": t.wrong_ready(),
            })
        })
        .collect();
    let report = json!({
        "slots": slots,
        "expected": traces[0].expected,
        "predicted_ready": predicted,
        "runs": runs,
        "all_ready_runs": all_ready_runs,
        "no_ready_runs": no_ready_runs,
        "wrong": wrong,
        "unconverged": unconverged,
        "agree": agree,
    });
    if let Some(path) = &args.traces {
        let text = serde_json::to_string_pretty(&traces).expect("plain data serializes");
        write(path, &format!("{text}\n"))?;
    }
    emit(&report, global.format, None)?;
    Ok(if agree { 0 } else { EXIT_FAIL })
}
