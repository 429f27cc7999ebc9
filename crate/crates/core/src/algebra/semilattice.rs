//! Join-semilattice detection and its consequences for free states.

use serde::Serialize;

use super::{is_acyclic, natural_order, PropVerdict};
use crate::automaton::StateId;
use crate::error::{Error, Result};
use crate::ft::all_ft_states;
use crate::graph::TransitionGraph;
use crate::order::{BitMatrix, PartialOrder};
use crate::query::Query;

/// Binary joins of a finite join-semilattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTable {
    n: usize,
    join: Vec<u32>,
}

impl JoinTable {
    pub fn join(&self, a: StateId, b: StateId) -> StateId {
        StateId(self.join[a.index() * self.n + b.index()])
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

fn dense(order: &PartialOrder) -> Result<&BitMatrix> {
    order.matrix().ok_or_else(|| {
        Error::cap(
            "join-semilattice check (dense order required)",
            order.size() as u128,
            crate::order::DENSE_ORDER_CAP as u128,
        )
    })
}

/// Least upper bound of `a` and `b`: the element of `up(a) ∩ up(b)` whose own
/// up-set is that whole intersection.
fn lub(m: &BitMatrix, scratch: &mut [u64], a: usize, b: usize) -> Option<usize> {
    let mut count = 0usize;
    for ((s, x), y) in scratch.iter_mut().zip(m.row(a)).zip(m.row(b)) {
        *s = x & y;
        count += s.count_ones() as usize;
    }
    for (wi, &word) in scratch.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let u = wi * 64 + w.trailing_zeros() as usize;
            if m.row_count(u) == count {
                return Some(u);
            }
            w &= w - 1;
        }
    }
    None
}

/// Every pair has a least upper bound. For a finite order, binary joins
/// extend to every nonempty finite subset.
pub fn is_join_semilattice(order: &PartialOrder) -> Result<bool> {
    let m = dense(order)?;
    let n = order.size();
    let mut scratch = vec![0u64; n.div_ceil(64)];
    for a in 0..n {
        for b in (a + 1)..n {
            if lub(m, &mut scratch, a, b).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The join table when `order` is a join-semilattice, `None` otherwise.
pub fn join_table(order: &PartialOrder) -> Result<Option<JoinTable>> {
    let m = dense(order)?;
    let n = order.size();
    let mut scratch = vec![0u64; n.div_ceil(64)];
    let mut join = vec![0u32; n * n];
    for a in 0..n {
        join[a * n + a] = a as u32;
        for b in (a + 1)..n {
            match lub(m, &mut scratch, a, b) {
                Some(u) => {
                    join[a * n + b] = u as u32;
                    join[b * n + a] = u as u32;
                }
                None => return Ok(None),
            }
        }
    }
    Ok(Some(JoinTable { n, join }))
}

/// Outcome of the two semilattice propositions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemilatticeVerdict {
    /// All free states share one query value.
    pub same_value: PropVerdict,
    /// If any free state exists, every state reaches one.
    pub ft_reachable: PropVerdict,
}

/// Checks both consequences of a join-semilattice natural order. Rejects
/// inputs whose natural order is missing or not a join-semilattice.
pub fn check_semilattice_ft_props(
    graph: &TransitionGraph,
    query: &Query,
) -> Result<SemilatticeVerdict> {
    if !is_acyclic(graph) {
        return Err(Error::precondition("graph is cyclic, no natural order"));
    }
    let order = natural_order(graph)?;
    if !is_join_semilattice(&order)? {
        return Err(Error::precondition(
            "natural order is not a join-semilattice",
        ));
    }
    let verdict = all_ft_states(graph, query)?;
    let ft = verdict.ft_states();

    let same_value = match ft.iter().find(|&&s| query.class(s) != query.class(ft[0])) {
        _ if ft.is_empty() => PropVerdict::Pass,
        None => PropVerdict::Pass,
        Some(&other) => PropVerdict::fail(vec![ft[0], other], "free states with different values"),
    };
    let ft_reachable = if ft.is_empty() {
        PropVerdict::not_applicable("no free termination states")
    } else {
        let reaches = graph.backward_closure(ft.iter().copied());
        let stuck: Vec<StateId> = graph.states().filter(|s| !reaches[s.index()]).collect();
        if stuck.is_empty() {
            PropVerdict::Pass
        } else {
            PropVerdict::fail(stuck, "states that cannot reach a free state")
        }
    };
    Ok(SemilatticeVerdict {
        same_value,
        ft_reachable,
    })
}
