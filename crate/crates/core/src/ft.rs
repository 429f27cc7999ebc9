//! Free termination: deciding, for each state, whether every reachable
//! state shares its query value.
//!
//! [`all_ft_states`] is the linear-time algorithm over the SCC condensation;
//! [`ft_oracle`] checks the definition directly with one search per state
//! and exists to cross-check it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::automaton::StateId;
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::query::Query;

/// Default state-count cap for [`ft_oracle`].
pub const ORACLE_CAP: usize = 4096;

/// Outcome of a single-state free-termination check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtStatus {
    Free,
    /// `witness` is reachable and has a different query value.
    NotFree {
        witness: StateId,
    },
}

impl FtStatus {
    pub fn is_free(self) -> bool {
        matches!(self, FtStatus::Free)
    }
}

/// Free-termination verdict for every state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FtVerdict {
    per_state: Vec<bool>,
    witnesses: BTreeMap<StateId, StateId>,
}

impl FtVerdict {
    pub fn is_ft(&self, s: StateId) -> bool {
        self.per_state[s.index()]
    }

    pub fn per_state(&self) -> &[bool] {
        &self.per_state
    }

    /// Free termination states in increasing index order.
    pub fn ft_states(&self) -> Vec<StateId> {
        self.per_state
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| StateId::from_index(i))
            .collect()
    }

    pub fn num_ft(&self) -> usize {
        self.per_state.iter().filter(|&&b| b).count()
    }

    /// For each non-free state, one reachable state with a different value.
    pub fn witnesses(&self) -> &BTreeMap<StateId, StateId> {
        &self.witnesses
    }

    pub fn witness(&self, s: StateId) -> Option<StateId> {
        self.witnesses.get(&s).copied()
    }

    /// Re-checks every stored witness against the graph: reachable from its
    /// state and carrying a different query value. Also checks that exactly
    /// the non-free states have witnesses.
    pub fn validate(&self, graph: &TransitionGraph, query: &Query) -> Result<()> {
        for s in graph.states() {
            match (self.is_ft(s), self.witness(s)) {
                (true, None) => {}
                (false, Some(w)) => {
                    if query.class(w) == query.class(s) {
                        return Err(Error::malformed(format!(
                            "witness {w} of {s} has the same query value"
                        )));
                    }
                    if !graph.reaches(s, w)? {
                        return Err(Error::malformed(format!(
                            "witness {w} is not reachable from {s}"
                        )));
                    }
                }
                (true, Some(_)) => {
                    return Err(Error::malformed(format!("free state {s} has a witness")))
                }
                (false, None) => {
                    return Err(Error::malformed(format!("state {s} lacks a witness")))
                }
            }
        }
        Ok(())
    }
}

/// Checks one state by searching its closure. The witness, when there is
/// one, is the lowest-index reachable state with a different value.
pub fn is_ft_state(graph: &TransitionGraph, query: &Query, s: StateId) -> Result<FtStatus> {
    graph.check_state(s)?;
    query.check_len(graph.num_states())?;
    let seen = graph.bfs(s, None);
    let q = query.class(s);
    Ok(first_differing(&seen, query, q)
        .map(|w| FtStatus::NotFree { witness: w })
        .unwrap_or(FtStatus::Free))
}

fn first_differing(seen: &[bool], query: &Query, class: u32) -> Option<StateId> {
    seen.iter()
        .enumerate()
        .find(|&(i, &r)| r && query.classes()[i] != class)
        .map(|(i, _)| StateId::from_index(i))
}

/// Direct-definition verdict: one forward search per state.
/// Quadratic; refuses inputs above `cap` states.
pub fn ft_oracle_with_cap(graph: &TransitionGraph, query: &Query, cap: usize) -> Result<FtVerdict> {
    if graph.num_states() > cap {
        return Err(Error::cap(
            "oracle state count",
            graph.num_states() as u128,
            cap as u128,
        ));
    }
    query.check_len(graph.num_states())?;
    let mut per_state = Vec::with_capacity(graph.num_states());
    let mut witnesses = BTreeMap::new();
    for s in graph.states() {
        match is_ft_state(graph, query, s)? {
            FtStatus::Free => per_state.push(true),
            FtStatus::NotFree { witness } => {
                per_state.push(false);
                witnesses.insert(s, witness);
            }
        }
    }
    Ok(FtVerdict {
        per_state,
        witnesses,
    })
}

/// [`ft_oracle_with_cap`] with [`ORACLE_CAP`].
pub fn ft_oracle(graph: &TransitionGraph, query: &Query) -> Result<FtVerdict> {
    ft_oracle_with_cap(graph, query, ORACLE_CAP)
}

/// Per-SCC evidence that the component is not free.
#[derive(Clone, Copy)]
enum SccWitness {
    /// Uniform SCC; `state` is reachable from all members and differs from
    /// the SCC's value.
    Uniform(StateId),
    /// Mixed SCC; `a` and `b` are members with different values.
    Mixed(StateId, StateId),
}

/// All free termination states in time linear in `|D|·|L|`.
///
/// 1. condense `G[S]` into its SCC DAG;
/// 2. mark every SCC holding two different query values, plus every SCC
///    that reaches one, as non-free;
/// 3. sweep the remaining SCCs sinks-first, marking an SCC free iff all its
///    successors are free with the same value.
///
/// Witnesses: a mixed SCC's states use a member with a different value; any
/// other non-free SCC takes its witness from the first offending successor
/// in ascending SCC order (lowest state index within it).
pub fn all_ft_states(graph: &TransitionGraph, query: &Query) -> Result<FtVerdict> {
    query.check_len(graph.num_states())?;
    let k = graph.num_sccs();
    let classes = query.classes();

    // Step 1 is the graph's own condensation. Uniform value per SCC, or None
    // when mixed.
    let mut scc_class: Vec<Option<u32>> = Vec::with_capacity(k);
    let mut mixed_pair: Vec<Option<(StateId, StateId)>> = vec![None; k];
    for (c, mixed) in mixed_pair.iter_mut().enumerate() {
        let members = graph.scc_members(c);
        let first = members[0];
        let q0 = classes[first.index()];
        match members.iter().find(|s| classes[s.index()] != q0) {
            None => scc_class.push(Some(q0)),
            Some(&other) => {
                scc_class.push(None);
                *mixed = Some((first, other));
            }
        }
    }

    // Step 2: reverse search over the condensation from mixed SCCs. The DAG
    // is stored forwards only, so walk ids upward: predecessors of an SCC
    // always have larger ids, and an SCC is removed iff some successor is.
    let mut removed = vec![false; k];
    for c in 0..k {
        removed[c] =
            scc_class[c].is_none() || graph.scc_successors(c).iter().any(|&d| removed[d as usize]);
    }

    // Step 3: sinks-first sweep.
    let mut free = vec![false; k];
    let mut evidence: Vec<Option<SccWitness>> = vec![None; k];
    for c in 0..k {
        if let Some((a, b)) = mixed_pair[c] {
            evidence[c] = Some(SccWitness::Mixed(a, b));
            continue;
        }
        let q = scc_class[c].expect("uniform SCC");
        let mut offending = None;
        for &d in graph.scc_successors(c) {
            let d = d as usize;
            if let Some(w) = offending_witness(d, q, &scc_class, &evidence, &free, graph, classes) {
                offending = Some(w);
                break;
            }
        }
        match offending {
            None => {
                debug_assert!(!removed[c]);
                free[c] = true;
            }
            Some(w) => evidence[c] = Some(SccWitness::Uniform(w)),
        }
    }

    let mut per_state = vec![false; graph.num_states()];
    let mut witnesses = BTreeMap::new();
    for c in 0..k {
        for &s in graph.scc_members(c) {
            if free[c] {
                per_state[s.index()] = true;
                continue;
            }
            let w = match evidence[c].expect("non-free SCC has evidence") {
                SccWitness::Uniform(w) => w,
                SccWitness::Mixed(a, b) => {
                    if classes[a.index()] != classes[s.index()] {
                        a
                    } else {
                        b
                    }
                }
            };
            witnesses.insert(s, w);
        }
    }
    Ok(FtVerdict {
        per_state,
        witnesses,
    })
}

/// If successor SCC `d` shows that a uniform SCC with class `q` is not
/// free, returns a state reachable through `d` whose class differs from `q`.
fn offending_witness(
    d: usize,
    q: u32,
    scc_class: &[Option<u32>],
    evidence: &[Option<SccWitness>],
    free: &[bool],
    graph: &TransitionGraph,
    classes: &[u32],
) -> Option<StateId> {
    match (scc_class[d], evidence[d]) {
        (None, Some(SccWitness::Mixed(a, b))) => Some(if classes[a.index()] != q { a } else { b }),
        (Some(qd), _) if qd != q => Some(graph.scc_members(d)[0]),
        (Some(_), _) if free[d] => None,
        // same value, not free: its witness differs from q
        (Some(_), Some(SccWitness::Uniform(w))) => Some(w),
        _ => unreachable!("successor SCC processed before its predecessor"),
    }
}

/// The four free-termination scenarios, numbered in the order they are
/// usually listed:
///
/// 1. every state reaches a free state and all free states agree on the value;
/// 2. every state reaches a free state but free states disagree;
/// 3. there are no free states;
/// 4. otherwise (some states cannot reach any free state).
pub fn classify_figure1_category(graph: &TransitionGraph, query: &Query) -> Result<u8> {
    let verdict = all_ft_states(graph, query)?;
    Ok(classify_verdict(graph, query, &verdict))
}

pub fn classify_verdict(graph: &TransitionGraph, query: &Query, verdict: &FtVerdict) -> u8 {
    let ft = verdict.ft_states();
    if ft.is_empty() {
        return 3;
    }
    let reaches_ft = graph.backward_closure(ft.iter().copied());
    if !reaches_ft.iter().all(|&b| b) {
        return 4;
    }
    let q0 = query.class(ft[0]);
    if ft.iter().all(|&s| query.class(s) == q0) {
        1
    } else {
        2
    }
}

/// JSON shape of a free-termination report: state names, category and
/// witnesses keyed by state name.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FtReport {
    pub ft_states: Vec<String>,
    pub category: u8,
    pub witnesses: BTreeMap<String, String>,
}

impl FtReport {
    pub fn new(verdict: &FtVerdict, category: u8, name: impl Fn(StateId) -> String) -> Self {
        FtReport {
            ft_states: verdict.ft_states().into_iter().map(&name).collect(),
            category,
            witnesses: verdict
                .witnesses()
                .iter()
                .map(|(&s, &w)| (name(s), name(w)))
                .collect(),
        }
    }
}
