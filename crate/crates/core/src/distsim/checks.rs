//! Coordination-freeness checks built on the simulator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::policy::{
    all_metadata_policy, ft_ready_policy, policy_aware_ft_policy, DistributionPolicy, LocalView,
    ReadyPolicy, MAX_UNIVERSE,
};
use super::sim::{run, Mode, RunSchedule, RunTrace};
use super::{check_universe, random_partition, DistQuery, Network};
use crate::error::{Error, Result};
use crate::relational::{Const, Expr, Fact, Instance};

/// Largest number of `(I, J)` pairs the domain-distinct check will visit.
pub const DDM_PAIR_BUDGET: u128 = 1 << 24;

/// Outcome of [`check_cf_correct`], one entry per ready slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfVerdict {
    pub slots: Vec<String>,
    /// Whether the input is a free termination state for each slot.
    pub ft: Vec<bool>,
    pub expected: Vec<bool>,
    pub trials: usize,
    /// Runs in which every node became ready.
    pub all_ready_runs: Vec<usize>,
    /// Runs in which no node became ready.
    pub no_ready_runs: Vec<usize>,
    /// Ready flags that fired with a wrong answer, over all runs.
    pub wrong: usize,
    /// Runs whose nodes did not all end with the whole input.
    pub unconverged: usize,
    /// Every slot behaved as its free termination status predicts.
    pub agree: bool,
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(trial as u64)
}

fn local_ft(policy: &dyn ReadyPolicy, slot: usize, pos: &Instance) -> bool {
    let empty = Instance::new();
    policy.ready(
        slot,
        &LocalView {
            pos,
            neg: &empty,
            all: false,
        },
    )
}

/// Runs `trials` seeded runs over random partitions with the free
/// termination ready policy and compares each slot with the prediction:
/// all nodes ready with the right answer when the input is free, no ready
/// flag at all otherwise.
pub fn check_cf_correct(
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    universe: &[Fact],
    trials: usize,
    seed: u64,
) -> Result<CfVerdict> {
    check_universe(universe, instance, MAX_UNIVERSE)?;
    let policy = ft_ready_policy(query, universe)?;
    let k = policy.slots();
    let ft: Vec<bool> = (0..k).map(|s| local_ft(&policy, s, instance)).collect();
    let mut all_ready_runs = vec![0; k];
    let mut no_ready_runs = vec![0; k];
    let mut wrong = 0;
    let mut unconverged = 0;
    let expected = query
        .slot_exprs()
        .iter()
        .map(|e| e.eval(instance))
        .collect();
    for trial in 0..trials {
        let s = trial_seed(seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let parts = random_partition(instance, network.nodes, &mut rng);
        let trace = run(
            network,
            instance,
            &parts,
            query,
            &RunSchedule::new(s),
            &policy,
            Mode::Plain,
        )?;
        for slot in 0..k {
            all_ready_runs[slot] += usize::from(trace.all_ready(slot));
            no_ready_runs[slot] += usize::from(trace.none_ready(slot));
        }
        wrong += trace.wrong_ready();
        unconverged += usize::from(!trace.converged);
    }
    let agree = wrong == 0
        && unconverged == 0
        && (0..k).all(|s| {
            if ft[s] {
                all_ready_runs[s] == trials
            } else {
                no_ready_runs[s] == trials
            }
        });
    Ok(CfVerdict {
        slots: query.slot_names(),
        ft,
        expected,
        trials,
        all_ready_runs,
        no_ready_runs,
        wrong,
        unconverged,
        agree,
    })
}

/// One run over a random partition drawn from the schedule seed, with the
/// free termination ready policy.
pub fn run_plain(
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    universe: &[Fact],
    schedule: &RunSchedule,
) -> Result<RunTrace> {
    check_universe(universe, instance, MAX_UNIVERSE)?;
    let policy = ft_ready_policy(query, universe)?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let parts = random_partition(instance, network.nodes, &mut rng);
    run(
        network,
        instance,
        &parts,
        query,
        schedule,
        &policy,
        Mode::Plain,
    )
}

/// Per-output outcome of [`per_tuple_ready_run`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleVerdict {
    pub output: Const,
    /// Membership of `output` in the answer on the whole input.
    pub member: bool,
    pub ft: bool,
    /// Nodes whose flag for this output fired.
    pub ready_nodes: usize,
    /// Flags that fired with the wrong membership.
    pub wrong: usize,
}

/// One run of a set-valued query with a ready flag per candidate output.
pub fn per_tuple_ready_run(
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    universe: &[Fact],
    schedule: &RunSchedule,
) -> Result<(RunTrace, Vec<TupleVerdict>)> {
    let DistQuery::Set { outputs, .. } = query else {
        return Err(Error::precondition(
            "per-tuple ready needs a set-valued query",
        ));
    };
    let policy = ft_ready_policy(query, universe)?;
    let trace = run_plain(network, query, instance, universe, schedule)?;
    let verdicts = outputs
        .iter()
        .enumerate()
        .map(|(slot, c)| TupleVerdict {
            output: c.clone(),
            member: trace.expected[slot],
            ft: local_ft(&policy, slot, instance),
            ready_nodes: trace.ready.iter().filter(|r| r[slot]).count(),
            wrong: trace
                .ready_value
                .iter()
                .filter(|r| r[slot].is_some_and(|v| v != trace.expected[slot]))
                .count(),
        })
        .collect();
    Ok((trace, verdicts))
}

/// One run over a random partition where the coordinator sets `All()`
/// after data quiescence.
pub fn run_with_all_metadata(
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    universe: &[Fact],
    schedule: &RunSchedule,
) -> Result<RunTrace> {
    check_universe(universe, instance, MAX_UNIVERSE)?;
    let policy = all_metadata_policy(query, universe)?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let parts = random_partition(instance, network.nodes, &mut rng);
    run(
        network,
        instance,
        &parts,
        query,
        schedule,
        &policy,
        Mode::AllMetadata,
    )
}

/// One run with negative facts learned from `dist`, whose domain is the
/// fact universe. The partition is the one the policy dictates.
pub fn run_policy_aware(
    network: &Network,
    query: &DistQuery,
    instance: &Instance,
    dist: &DistributionPolicy,
    schedule: &RunSchedule,
) -> Result<RunTrace> {
    let universe: Vec<Fact> = dist.facts().cloned().collect();
    check_universe(&universe, instance, super::MAX_POLICY_AWARE_UNIVERSE)?;
    let policy = policy_aware_ft_policy(query, &universe)?;
    let parts = dist.partition(instance, network.nodes);
    run(
        network,
        instance,
        &parts,
        query,
        schedule,
        &policy,
        Mode::PolicyAware(dist),
    )
}

/// Whether `Q(I)` implies `Q(I ∪ J)` for all `I, J` over `universe` where
/// every fact of `J` uses a constant outside the active domain of `I`.
pub fn check_domain_distinct_monotone(query: &Expr, universe: &[Fact]) -> Result<bool> {
    check_universe(universe, &Instance::new(), MAX_UNIVERSE)?;
    let n = universe.len();
    let c = query.compile(universe)?;
    // Constant set of each fact as a bitmask.
    let consts: Vec<Const> = crate::relational::active_domain(universe)
        .into_iter()
        .collect();
    if consts.len() > 64 {
        return Err(Error::cap(
            "constants in the universe",
            consts.len() as u128,
            64,
        ));
    }
    let fact_consts: Vec<u64> = universe
        .iter()
        .map(|f| {
            f.tuple
                .iter()
                .map(|x| {
                    1u64 << consts
                        .binary_search(x)
                        .expect("constant of a universe fact")
                })
                .fold(0, |m, b| m | b)
        })
        .collect();
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    let allowed = |i: u64| -> u64 {
        let adom = (0..n)
            .filter(|&f| i >> f & 1 == 1)
            .fold(0, |m, f| m | fact_consts[f]);
        (0..n)
            .filter(|&f| fact_consts[f] & !adom != 0)
            .fold(0, |m, f| m | 1 << f)
    };
    let pairs: u128 = (0..=full).map(|i| 1u128 << allowed(i).count_ones()).sum();
    if pairs > DDM_PAIR_BUDGET {
        return Err(Error::cap(
            "domain-distinct instance pairs",
            pairs,
            DDM_PAIR_BUDGET,
        ));
    }
    for i in 0..=full {
        if !c.eval(i) {
            continue;
        }
        let a = allowed(i);
        let mut j = a;
        loop {
            if !c.eval(i | j) {
                return Ok(false);
            }
            if j == 0 {
                break;
            }
            j = (j - 1) & a;
        }
    }
    Ok(true)
}
