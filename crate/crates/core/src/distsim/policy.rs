//! Ready policies and fact distribution policies.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{check_universe, DistQuery};
use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};
use crate::ft::all_ft_states;
use crate::graph::build_graph;
use crate::models::{powerset_union, Model};
use crate::query::Query;
use crate::relational::{format_set, Expr, Fact, Instance};

/// Universe size cap for the set-union encodings.
pub const MAX_UNIVERSE: usize = 19;
/// Universe size cap for the positive/negative encoding (`3^n` states).
pub const MAX_POLICY_AWARE_UNIVERSE: usize = 12;

/// What a node can see when deciding to become ready.
#[derive(Clone, Copy, Debug)]
pub struct LocalView<'a> {
    pub pos: &'a Instance,
    pub neg: &'a Instance,
    /// The out-of-band "all data has been sent" flag.
    pub all: bool,
}

/// Decides, from a node's local state only, when each ready flag may be set.
pub trait ReadyPolicy: Sync {
    /// Number of independent ready flags per node.
    fn slots(&self) -> usize;
    fn ready(&self, slot: usize, local: &LocalView<'_>) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Encoding {
    /// State index is the mask of positive facts.
    Union,
    /// Mask of positive facts, plus `2^n` when the All flag is set.
    UnionAll,
    /// Base-3 digit per fact: 0 unknown, 1 present, 2 absent.
    PlusMinus,
}

/// Ready exactly when the local state is a free termination state of the
/// slot's query in a bounded system over the fact universe.
#[derive(Clone, Debug)]
pub struct FtReadyPolicy {
    index: HashMap<Fact, usize>,
    encoding: Encoding,
    ft: Vec<Vec<bool>>,
}

impl FtReadyPolicy {
    fn encode(&self, local: &LocalView<'_>) -> Option<usize> {
        let bit = |f: &Fact| self.index.get(f).copied();
        match self.encoding {
            Encoding::Union | Encoding::UnionAll => {
                let mut m = 0usize;
                for f in local.pos {
                    m |= 1 << bit(f)?;
                }
                if self.encoding == Encoding::UnionAll && local.all {
                    m |= 1 << self.index.len();
                }
                Some(m)
            }
            Encoding::PlusMinus => {
                let mut digits = vec![0usize; self.index.len()];
                for f in local.pos {
                    digits[bit(f)?] = 1;
                }
                for f in local.neg {
                    digits[bit(f)?] = 2;
                }
                Some(digits.iter().rev().fold(0, |acc, d| acc * 3 + d))
            }
        }
    }

    /// Free termination status of one encoded state, for inspection.
    pub fn is_ft(&self, slot: usize, local: &LocalView<'_>) -> bool {
        self.ready(slot, local)
    }
}

impl ReadyPolicy for FtReadyPolicy {
    fn slots(&self) -> usize {
        self.ft.len()
    }

    fn ready(&self, slot: usize, local: &LocalView<'_>) -> bool {
        self.encode(local).is_some_and(|s| self.ft[slot][s])
    }
}

fn index_of(universe: &[Fact]) -> HashMap<Fact, usize> {
    universe
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect()
}

fn ft_bits(a: &Semiautomaton, q: &Query) -> Result<Vec<bool>> {
    Ok(all_ft_states(&build_graph(a), q)?.per_state().to_vec())
}

/// Ready when the local instance is a free termination state in the
/// set-union system over `universe`.
pub fn ft_ready_policy(query: &DistQuery, universe: &[Fact]) -> Result<FtReadyPolicy> {
    check_universe(universe, &Instance::new(), MAX_UNIVERSE)?;
    let ft = query
        .slot_exprs()
        .iter()
        .map(|e| {
            let m = powerset_union(universe, e)?;
            ft_bits(&m.automaton, &m.query)
        })
        .collect::<Result<_>>()?;
    Ok(FtReadyPolicy {
        index: index_of(universe),
        encoding: Encoding::Union,
        ft,
    })
}

/// The set-union system extended with a label `All()` that moves to a copy
/// of the state where every transition is a self-loop.
pub fn all_metadata_model(universe: &[Fact], query: &Expr) -> Result<Model> {
    check_universe(universe, &Instance::new(), MAX_UNIVERSE)?;
    let n = universe.len();
    let all = 1usize << n;
    let mut labels: Vec<String> = universe.iter().map(|f| f.to_string()).collect();
    labels.push("All()".to_owned());
    let automaton = Semiautomaton::from_fn(2 * all, labels, Some(0), |s, l| {
        if s & all != 0 {
            s
        } else if l < n {
            s | 1 << l
        } else {
            s | all
        }
    })?;
    let c = query.compile(universe)?;
    let query = Query::from_fn(2 * all, |s| c.eval((s & (all - 1)) as u64).into());
    Ok(Model {
        automaton,
        query,
        provenance: format!("set union over {} with an All() flag", format_set(universe)),
    })
}

/// Ready when the local state, including the All flag, is free in
/// [`all_metadata_model`].
pub fn all_metadata_policy(query: &DistQuery, universe: &[Fact]) -> Result<FtReadyPolicy> {
    let ft = query
        .slot_exprs()
        .iter()
        .map(|e| {
            let m = all_metadata_model(universe, e)?;
            ft_bits(&m.automaton, &m.query)
        })
        .collect::<Result<_>>()?;
    Ok(FtReadyPolicy {
        index: index_of(universe),
        encoding: Encoding::UnionAll,
        ft,
    })
}

/// Pairs `(I⁺, I⁻)` of disjoint sets over `universe`; label `+t` adds `t`
/// to `I⁺` and `-t` adds it to `I⁻`. Adding a fact already on the other
/// side is a self-loop. The query reads `I⁺` only.
pub fn policy_aware_model(universe: &[Fact], query: &Expr) -> Result<Model> {
    check_universe(universe, &Instance::new(), MAX_POLICY_AWARE_UNIVERSE)?;
    let n = universe.len();
    let pow: Vec<usize> = (0..=n).map(|i| 3usize.pow(i as u32)).collect();
    let states = pow[n];
    let digit = |s: usize, i: usize| s / pow[i] % 3;
    let mut labels: Vec<String> = universe.iter().map(|f| format!("+{f}")).collect();
    labels.extend(universe.iter().map(|f| format!("-{f}")));
    let automaton = Semiautomaton::from_fn(states, labels, Some(0), |s, l| {
        let (i, d) = if l < n { (l, 1) } else { (l - n, 2) };
        if digit(s, i) == 0 {
            s + d * pow[i]
        } else {
            s
        }
    })?;
    let c = query.compile(universe)?;
    let query = Query::from_fn(states, |s| {
        let pos = (0..n)
            .filter(|&i| digit(s, i) == 1)
            .fold(0u64, |m, i| m | 1 << i);
        c.eval(pos).into()
    });
    Ok(Model {
        automaton,
        query,
        provenance: format!("positive/negative set union over {}", format_set(universe)),
    })
}

/// Ready when `(I⁺, I⁻)` is free in [`policy_aware_model`].
pub fn policy_aware_ft_policy(query: &DistQuery, universe: &[Fact]) -> Result<FtReadyPolicy> {
    let ft = query
        .slot_exprs()
        .iter()
        .map(|e| {
            let m = policy_aware_model(universe, e)?;
            ft_bits(&m.automaton, &m.query)
        })
        .collect::<Result<_>>()?;
    Ok(FtReadyPolicy {
        index: index_of(universe),
        encoding: Encoding::PlusMinus,
        ft,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct PolicyEntry {
    fact: Fact,
    nodes: Vec<usize>,
}

/// Maps each fact to the nodes that hold it when it is part of the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<PolicyEntry>", into = "Vec<PolicyEntry>")]
pub struct DistributionPolicy {
    holders: BTreeMap<Fact, BTreeSet<usize>>,
}

impl From<Vec<PolicyEntry>> for DistributionPolicy {
    fn from(entries: Vec<PolicyEntry>) -> Self {
        let mut holders: BTreeMap<Fact, BTreeSet<usize>> = BTreeMap::new();
        for e in entries {
            holders.entry(e.fact).or_default().extend(e.nodes);
        }
        DistributionPolicy { holders }
    }
}

impl From<DistributionPolicy> for Vec<PolicyEntry> {
    fn from(p: DistributionPolicy) -> Self {
        p.holders
            .into_iter()
            .map(|(fact, nodes)| PolicyEntry {
                fact,
                nodes: nodes.into_iter().collect(),
            })
            .collect()
    }
}

impl DistributionPolicy {
    pub fn new(holders: BTreeMap<Fact, BTreeSet<usize>>) -> Self {
        DistributionPolicy { holders }
    }

    /// Every fact is held by every node.
    pub fn all_nodes(universe: &[Fact], nodes: usize) -> Self {
        DistributionPolicy {
            holders: universe
                .iter()
                .map(|f| (f.clone(), (0..nodes).collect()))
                .collect(),
        }
    }

    /// The facts the policy covers, in sorted order.
    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.holders.keys()
    }

    pub fn holders(&self, f: &Fact) -> Option<&BTreeSet<usize>> {
        self.holders.get(f)
    }

    /// Every universe fact must map to a nonempty set of existing nodes.
    pub fn validate(&self, universe: &[Fact], nodes: usize) -> Result<()> {
        for f in universe {
            match self.holders.get(f) {
                None => return Err(Error::malformed(format!("policy does not cover fact {f}"))),
                Some(h) if h.is_empty() => {
                    return Err(Error::malformed(format!(
                        "policy assigns fact {f} to no node"
                    )))
                }
                Some(h) => {
                    if let Some(&v) = h.iter().find(|&&v| v >= nodes) {
                        return Err(Error::malformed(format!(
                            "policy assigns {f} to missing node {v}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The partitioning the policy dictates for `instance`.
    pub fn partition(&self, instance: &Instance, nodes: usize) -> Vec<Instance> {
        let mut parts = vec![Instance::new(); nodes];
        for f in instance {
            for &v in self.holders.get(f).into_iter().flatten() {
                parts[v].insert(f.clone());
            }
        }
        parts
    }
}
