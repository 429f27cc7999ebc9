//! Deterministic simulation of network flooding with ready flags.
//!
//! Each node holds a local instance, receives facts from neighbours through
//! a multiset buffer and may declare itself ready, after which its answer is
//! final. A seeded scheduler interleaves produce and consume transitions at
//! random, then drains every buffer and floods every held fact so that the
//! simulated prefix ends at the quiescence point of a fair, complete run.

mod checks;
mod policy;
mod sim;

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use checks::{
    check_cf_correct, check_domain_distinct_monotone, per_tuple_ready_run, run_plain,
    run_policy_aware, run_with_all_metadata, CfVerdict, TupleVerdict, DDM_PAIR_BUDGET,
};
pub use policy::{
    all_metadata_policy, ft_ready_policy, policy_aware_ft_policy, DistributionPolicy,
    FtReadyPolicy, LocalView, ReadyPolicy, MAX_POLICY_AWARE_UNIVERSE, MAX_UNIVERSE,
};
pub use sim::{run, Event, EventKind, Mode, RunSchedule, RunTrace};

use crate::error::{Error, Result};
use crate::relational::{Const, Expr, Fact, Instance};

/// Connected undirected graph over nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Network {
    /// Validates node ids and connectivity.
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let net = Network { nodes, edges };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::malformed("network needs at least one node"));
        }
        for &(u, v) in &self.edges {
            if u >= self.nodes || v >= self.nodes {
                return Err(Error::malformed(format!(
                    "edge ({u},{v}) names a node outside 0..{}",
                    self.nodes
                )));
            }
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.nodes];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::malformed(format!(
                "network is disconnected: node {v} unreachable from node 0"
            )));
        }
        Ok(())
    }

    /// Sorted, deduplicated neighbour lists without self-edges.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.nodes];
        for &(u, v) in &self.edges {
            if u != v && u < self.nodes && v < self.nodes {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn line(n: usize) -> Self {
        Network {
            nodes: n.max(1),
            edges: (1..n).map(|i| (i - 1, i)).collect(),
        }
    }

    pub fn ring(n: usize) -> Self {
        let mut net = Network::line(n);
        if n > 2 {
            net.edges.push((n - 1, 0));
        }
        net
    }

    pub fn complete(n: usize) -> Self {
        Network {
            nodes: n.max(1),
            edges: (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect(),
        }
    }
}

/// A query over the global instance: Boolean, or a set of outputs drawn
/// from an explicit candidate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistQuery {
    Boolean(Expr),
    /// `{ c ∈ outputs : expr[var := c] }`.
    Set {
        var: String,
        expr: Expr,
        outputs: Vec<Const>,
    },
}

impl DistQuery {
    /// One Boolean query per ready flag: the query itself, or membership of
    /// each candidate output.
    pub fn slot_exprs(&self) -> Vec<Expr> {
        match self {
            DistQuery::Boolean(e) => vec![e.clone()],
            DistQuery::Set { var, expr, outputs } => {
                outputs.iter().map(|c| expr.substitute(var, c)).collect()
            }
        }
    }

    pub fn slot_names(&self) -> Vec<String> {
        match self {
            DistQuery::Boolean(_) => vec!["Q".to_owned()],
            DistQuery::Set { outputs, .. } => outputs.iter().map(|c| format!("({c})")).collect(),
        }
    }

    pub fn eval_set(&self, inst: &Instance) -> BTreeSet<Const> {
        match self {
            DistQuery::Boolean(e) => {
                if e.eval(inst) {
                    BTreeSet::from([Const::Sym("()".into())])
                } else {
                    BTreeSet::new()
                }
            }
            DistQuery::Set { var, expr, outputs } => outputs
                .iter()
                .filter(|c| expr.substitute(var, c).eval(inst))
                .cloned()
                .collect(),
        }
    }
}

/// Assigns each fact to one uniformly chosen node.
pub fn random_partition(instance: &Instance, nodes: usize, rng: &mut impl Rng) -> Vec<Instance> {
    let mut parts = vec![Instance::new(); nodes];
    for f in instance {
        parts[rng.gen_range(0..nodes)].insert(f.clone());
    }
    parts
}

pub(crate) fn check_universe(universe: &[Fact], instance: &Instance, cap: usize) -> Result<()> {
    if universe.len() > cap {
        return Err(Error::cap(
            "fact universe",
            universe.len() as u128,
            cap as u128,
        ));
    }
    for (i, f) in universe.iter().enumerate() {
        if universe[..i].contains(f) {
            return Err(Error::malformed(format!(
                "fact {f} appears twice in the universe"
            )));
        }
    }
    if let Some(f) = instance.iter().find(|f| !universe.contains(f)) {
        return Err(Error::precondition(format!(
            "fact {f} is outside the bounded universe; supply a universe that covers the instance"
        )));
    }
    Ok(())
}
