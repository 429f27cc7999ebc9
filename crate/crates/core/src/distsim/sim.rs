//! The scheduler: seeded random interleaving followed by a drain phase.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::policy::{DistributionPolicy, LocalView, ReadyPolicy};
use super::{DistQuery, Network};
use crate::error::{Error, Result};
use crate::relational::{active_domain, Expr, Fact, Instance};

/// Sends allowed per (message, directed edge): the first send plus two resends.
const MAX_SENDS: u8 = 3;

fn default_random_steps() -> usize {
    500
}

/// How a run is scheduled. The drain phase always runs, so every trace is
/// a prefix of a fair and complete run that contains its quiescence point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSchedule {
    pub seed: u64,
    /// Transitions taken in the random phase before draining.
    #[serde(default = "default_random_steps")]
    pub random_steps: usize,
}

impl RunSchedule {
    pub fn new(seed: u64) -> Self {
        RunSchedule {
            seed,
            random_steps: default_random_steps(),
        }
    }
}

/// Which variant of the distributed model to run.
#[derive(Clone, Copy, Debug)]
pub enum Mode<'a> {
    /// Positive facts are flooded; nothing else.
    Plain,
    /// After data quiescence a coordinator sets `All()` at every node.
    AllMetadata,
    /// Nodes also derive and flood negative facts using the policy.
    PolicyAware(&'a DistributionPolicy),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Msg {
    Pos(Fact),
    Neg(Fact),
}

impl fmt::Display for Msg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Msg::Pos(t) => write!(f, "+{t}"),
            Msg::Neg(t) => write!(f, "-{t}"),
        }
    }
}

/// One transition of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// A held fact copied into a neighbour's buffer.
    Produce { to: usize, msg: String },
    /// A fact taken from the node's buffer into its state.
    Consume { msg: String },
    /// A negative fact learned from the distribution policy.
    Derive { msg: String },
    /// Ready flag `slot` set; `value` is the answer at that moment.
    Ready { slot: usize, value: bool },
    /// The coordinator set `All()` at this node.
    AllInject,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub step: usize,
    pub node: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Everything observable about a finished run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    pub slots: Vec<String>,
    /// The answer of each slot on the whole input.
    pub expected: Vec<bool>,
    pub events: Vec<Event>,
    /// Number of transitions up to and including the last change to a
    /// node's data; 0 when no data moved.
    pub quiescence_step: usize,
    /// `ready[v][slot]`.
    pub ready: Vec<Vec<bool>>,
    pub ready_step: Vec<Vec<Option<usize>>>,
    pub ready_value: Vec<Vec<Option<bool>>>,
    pub final_pos: Vec<Instance>,
    pub final_neg: Vec<Instance>,
    /// Every node ended with the whole input (and, with a policy, with the
    /// complement over the input's active domain).
    pub converged: bool,
    /// Set when the `All()` coordinator acted.
    pub coordination_used: bool,
}

impl RunTrace {
    pub fn all_ready(&self, slot: usize) -> bool {
        self.ready.iter().all(|r| r[slot])
    }

    pub fn none_ready(&self, slot: usize) -> bool {
        self.ready.iter().all(|r| !r[slot])
    }

    /// Ready flags that fired with an answer different from the global one.
    pub fn wrong_ready(&self) -> usize {
        self.ready_value
            .iter()
            .flat_map(|row| row.iter().enumerate())
            .filter(|(slot, v)| v.is_some_and(|v| v != self.expected[*slot]))
            .count()
    }
}

struct Node {
    pos: Instance,
    neg: Instance,
    initial: Instance,
    all: bool,
    buf: Vec<Msg>,
    sent: HashMap<(Msg, usize), u8>,
    ready: Vec<bool>,
}

enum Action {
    Produce(Msg, usize),
    Consume(usize),
    Derive(Fact),
}

struct Sim<'a> {
    adj: Vec<Vec<usize>>,
    nodes: Vec<Node>,
    slots: Vec<Expr>,
    policy: &'a dyn ReadyPolicy,
    dist: Option<&'a DistributionPolicy>,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    ready_step: Vec<Vec<Option<usize>>>,
    ready_value: Vec<Vec<Option<bool>>>,
    last_change: usize,
}

impl Sim<'_> {
    fn push(&mut self, node: usize, kind: EventKind) {
        let step = self.events.len();
        self.events.push(Event { step, node, kind });
    }

    fn held(&self, v: usize) -> impl Iterator<Item = Msg> + '_ {
        let n = &self.nodes[v];
        n.pos
            .iter()
            .cloned()
            .map(Msg::Pos)
            .chain(n.neg.iter().cloned().map(Msg::Neg))
    }

    /// Negative facts node `v` may derive now: facts it is responsible for,
    /// does not hold initially, and whose constants it has already seen.
    fn derivable(&self, v: usize) -> Vec<Fact> {
        let Some(dist) = self.dist else {
            return Vec::new();
        };
        let n = &self.nodes[v];
        let adom = active_domain(&n.pos);
        dist.facts()
            .filter(|t| {
                dist.holders(t).is_some_and(|h| h.contains(&v))
                    && !n.initial.contains(t)
                    && !n.neg.contains(t)
                    && t.tuple.iter().all(|c| adom.contains(c))
            })
            .cloned()
            .collect()
    }

    fn actions(&self, v: usize, unsent_only: bool) -> Vec<Action> {
        let mut out: Vec<Action> = self.derivable(v).into_iter().map(Action::Derive).collect();
        let cap = if unsent_only { 1 } else { MAX_SENDS };
        for m in self.held(v) {
            for &w in &self.adj[v] {
                if self.nodes[v]
                    .sent
                    .get(&(m.clone(), w))
                    .copied()
                    .unwrap_or(0)
                    < cap
                {
                    out.push(Action::Produce(m.clone(), w));
                }
            }
        }
        out.extend((0..self.nodes[v].buf.len()).map(Action::Consume));
        out
    }

    fn apply(&mut self, v: usize, action: Action) {
        match action {
            Action::Produce(m, w) => {
                *self.nodes[v].sent.entry((m.clone(), w)).or_default() += 1;
                self.nodes[w].buf.push(m.clone());
                self.push(
                    v,
                    EventKind::Produce {
                        to: w,
                        msg: m.to_string(),
                    },
                );
            }
            Action::Consume(i) => {
                let m = self.nodes[v].buf.swap_remove(i);
                let node = &mut self.nodes[v];
                let changed = match &m {
                    Msg::Pos(t) => !node.neg.contains(t) && node.pos.insert(t.clone()),
                    Msg::Neg(t) => !node.pos.contains(t) && node.neg.insert(t.clone()),
                };
                self.push(v, EventKind::Consume { msg: m.to_string() });
                if changed {
                    self.last_change = self.events.len();
                    self.check_ready(v);
                }
            }
            Action::Derive(t) => {
                self.nodes[v].neg.insert(t.clone());
                self.push(
                    v,
                    EventKind::Derive {
                        msg: Msg::Neg(t).to_string(),
                    },
                );
                self.last_change = self.events.len();
                self.check_ready(v);
            }
        }
    }

    fn check_ready(&mut self, v: usize) {
        for slot in 0..self.slots.len() {
            if self.nodes[v].ready[slot] {
                continue;
            }
            let n = &self.nodes[v];
            let view = LocalView {
                pos: &n.pos,
                neg: &n.neg,
                all: n.all,
            };
            if self.policy.ready(slot, &view) {
                let value = self.slots[slot].eval(&n.pos);
                self.nodes[v].ready[slot] = true;
                let step = self.events.len();
                self.ready_step[v][slot] = Some(step);
                self.ready_value[v][slot] = Some(value);
                self.push(v, EventKind::Ready { slot, value });
            }
        }
    }

    fn random_step(&mut self) -> bool {
        let live: Vec<usize> = (0..self.nodes.len())
            .filter(|&v| !self.actions(v, false).is_empty())
            .collect();
        let Some(&v) = live.choose(&mut self.rng) else {
            return false;
        };
        let mut actions = self.actions(v, false);
        let i = self.rng.gen_range(0..actions.len());
        let a = actions.swap_remove(i);
        self.apply(v, a);
        true
    }

    /// Derives, sends every held fact at least once over every edge and
    /// empties every buffer, repeating until nothing is left to do.
    fn drain(&mut self) {
        loop {
            let mut progressed = false;
            for v in 0..self.nodes.len() {
                for t in self.derivable(v) {
                    self.apply(v, Action::Derive(t));
                    progressed = true;
                }
            }
            for v in 0..self.nodes.len() {
                for a in self.actions(v, true) {
                    if let Action::Produce(..) = a {
                        self.apply(v, a);
                        progressed = true;
                    }
                }
            }
            for v in 0..self.nodes.len() {
                while !self.nodes[v].buf.is_empty() {
                    let i = self.rng.gen_range(0..self.nodes[v].buf.len());
                    self.apply(v, Action::Consume(i));
                    progressed = true;
                }
            }
            if !progressed {
                break;
            }
        }
    }
}

/// Runs the distributed model on `instance` split as `partition`.
///
/// Ready flags are evaluated after every change to a node's state, using
/// only that node's local view. In [`Mode::PolicyAware`] the partition must
/// agree with the distribution policy on every input fact.
pub fn run(
    network: &Network,
    instance: &Instance,
    partition: &[Instance],
    query: &DistQuery,
    schedule: &RunSchedule,
    policy: &dyn ReadyPolicy,
    mode: Mode<'_>,
) -> Result<RunTrace> {
    network.validate()?;
    if partition.len() != network.nodes {
        return Err(Error::malformed(format!(
            "partition has {} parts for {} nodes",
            partition.len(),
            network.nodes
        )));
    }
    let union: Instance = partition.iter().flatten().cloned().collect();
    if &union != instance {
        return Err(Error::malformed(
            "the partition's union is not the input instance",
        ));
    }
    let slots = query.slot_exprs();
    if policy.slots() != slots.len() {
        return Err(Error::malformed(format!(
            "ready policy has {} slots, query has {}",
            policy.slots(),
            slots.len()
        )));
    }
    let dist = match mode {
        Mode::PolicyAware(d) => {
            let universe: Vec<Fact> = d.facts().cloned().collect();
            d.validate(&universe, network.nodes)?;
            for t in instance {
                let holders = d.holders(t).ok_or_else(|| {
                    Error::precondition(format!(
                        "fact {t} is outside the distribution policy's domain"
                    ))
                })?;
                let actual: BTreeSet<usize> = (0..network.nodes)
                    .filter(|&v| partition[v].contains(t))
                    .collect();
                if holders != &actual {
                    return Err(Error::malformed(format!(
                        "partition places {t} at {actual:?} but the policy says {holders:?}"
                    )));
                }
            }
            Some(d)
        }
        _ => None,
    };

    let k = slots.len();
    let nodes = partition
        .iter()
        .map(|p| Node {
            pos: p.clone(),
            neg: Instance::new(),
            initial: p.clone(),
            all: false,
            buf: Vec::new(),
            sent: HashMap::new(),
            ready: vec![false; k],
        })
        .collect();
    let mut sim = Sim {
        adj: network.adjacency(),
        nodes,
        slots,
        policy,
        dist,
        rng: ChaCha8Rng::seed_from_u64(schedule.seed),
        events: Vec::new(),
        ready_step: vec![vec![None; k]; network.nodes],
        ready_value: vec![vec![None; k]; network.nodes],
        last_change: 0,
    };
    for v in 0..network.nodes {
        sim.check_ready(v);
    }
    for _ in 0..schedule.random_steps {
        if !sim.random_step() {
            break;
        }
    }
    sim.drain();
    let quiescence_step = sim.last_change;

    let coordination_used = matches!(mode, Mode::AllMetadata);
    if coordination_used {
        for v in 0..network.nodes {
            sim.nodes[v].all = true;
            sim.push(v, EventKind::AllInject);
            sim.check_ready(v);
        }
    }

    let expected: Vec<bool> = sim.slots.iter().map(|e| e.eval(instance)).collect();
    let complement: Instance = match dist {
        Some(d) => {
            let adom = active_domain(instance);
            d.facts()
                .filter(|t| !instance.contains(t) && t.tuple.iter().all(|c| adom.contains(c)))
                .cloned()
                .collect()
        }
        None => Instance::new(),
    };
    let converged = sim
        .nodes
        .iter()
        .all(|n| &n.pos == instance && n.neg == complement);
    Ok(RunTrace {
        seed: schedule.seed,
        slots: query.slot_names(),
        expected,
        events: sim.events,
        quiescence_step,
        ready: sim.nodes.iter().map(|n| n.ready.clone()).collect(),
        ready_step: sim.ready_step,
        ready_value: sim.ready_value,
        final_pos: sim.nodes.iter().map(|n| n.pos.clone()).collect(),
        final_neg: sim.nodes.into_iter().map(|n| n.neg).collect(),
        converged,
        coordination_used,
    })
}
