//! Commutativity of updates and queries.

use serde::Serialize;

use super::PropVerdict;
use crate::automaton::{LabelId, Semiautomaton, StateId};
use crate::error::{Error, Result};
use crate::ft::all_ft_states;
use crate::graph::build_graph;
use crate::minimize::moore_partition;
use crate::query::Query;

/// Sequence length used by [`is_commutative_query_with_bound`] when callers
/// have no better choice.
pub const DEFAULT_QUERY_COMMUTATIVITY_BOUND: usize = 3;

/// Transition applications allowed in one bounded enumeration.
const ENUMERATION_BUDGET: u128 = 200_000_000;

/// A triple `(s, x, y)` with `s·x·y ≠ s·y·x`, if any.
pub fn update_commutativity_counterexample(
    a: &Semiautomaton,
) -> Option<(StateId, LabelId, LabelId)> {
    let k = a.num_labels();
    for s in a.states() {
        for x in 0..k {
            for y in (x + 1)..k {
                let (x, y) = (LabelId::from_index(x), LabelId::from_index(y));
                if a.step(a.step(s, x), y) != a.step(a.step(s, y), x) {
                    return Some((s, x, y));
                }
            }
        }
    }
    None
}

/// `s·a·b = s·b·a` for all states and label sequences. Swapping adjacent
/// single labels generates every reordering, so single labels suffice.
pub fn is_commutative_update(a: &Semiautomaton) -> bool {
    update_commutativity_counterexample(a).is_none()
}

/// `Q(s·a·b) = Q(s·b·a)` for all states and label sequences, decided
/// exactly.
///
/// This holds iff `s·x·y` and `s·y·x` are output-equivalent (same query
/// value after every continuation) for all states and single labels, so it
/// reduces to one Moore partition of the whole state space.
pub fn is_commutative_query(a: &Semiautomaton, query: &Query) -> Result<bool> {
    query.check_len(a.num_states())?;
    if is_commutative_update(a) {
        return Ok(true);
    }
    let class = moore_partition(a, query.classes());
    let k = a.num_labels();
    for s in a.states() {
        for x in 0..k {
            for y in (x + 1)..k {
                let (x, y) = (LabelId::from_index(x), LabelId::from_index(y));
                let xy = a.step(a.step(s, x), y);
                let yx = a.step(a.step(s, y), x);
                if class[xy.index()] != class[yx.index()] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Query commutativity checked by enumerating every state and every pair of
/// label sequences of length at most `bound`. Agrees with
/// [`is_commutative_query`] on violations short enough to be seen.
pub fn is_commutative_query_with_bound(
    a: &Semiautomaton,
    query: &Query,
    bound: usize,
) -> Result<bool> {
    query.check_len(a.num_states())?;
    let k = a.num_labels() as u128;
    let seqs: u128 = (1..=bound as u32).map(|i| k.saturating_pow(i)).sum();
    let work = (a.num_states() as u128)
        .saturating_mul(seqs)
        .saturating_mul(seqs)
        .saturating_mul(2 * bound as u128);
    if work > ENUMERATION_BUDGET {
        return Err(Error::cap(
            "query commutativity enumeration",
            work,
            ENUMERATION_BUDGET,
        ));
    }
    let sequences = all_sequences(a.num_labels(), bound);
    let run = |s: StateId, seq: &[LabelId]| seq.iter().fold(s, |t, &l| a.step(t, l));
    for s in a.states() {
        for (i, x) in sequences.iter().enumerate() {
            let sx = run(s, x);
            for y in &sequences[i + 1..] {
                let sy = run(s, y);
                if query.class(run(sx, y)) != query.class(run(sy, x)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Nonempty sequences over `k` labels of length at most `bound`.
fn all_sequences(k: usize, bound: usize) -> Vec<Vec<LabelId>> {
    let mut out: Vec<Vec<LabelId>> = Vec::new();
    let mut frontier: Vec<Vec<LabelId>> = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::with_capacity(frontier.len() * k);
        for seq in &frontier {
            for l in 0..k {
                let mut s = seq.clone();
                s.push(LabelId::from_index(l));
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Outcome of the two commutativity propositions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutativityVerdict {
    /// Commutative query: all free states share one value.
    pub same_value: PropVerdict,
    /// Commutative update with some free state: every state reaches one.
    pub ft_reachable: PropVerdict,
}

/// Checks the conclusions of both commutativity propositions. The start
/// state must reach every state.
pub fn check_commutativity_ft_props(
    a: &Semiautomaton,
    query: &Query,
) -> Result<CommutativityVerdict> {
    query.check_len(a.num_states())?;
    if a.start().is_none() {
        return Err(Error::precondition("automaton has no start state"));
    }
    if !a.start_reaches_all() {
        return Err(Error::precondition(
            "start state does not reach every state",
        ));
    }
    let graph = build_graph(a);
    let ft = all_ft_states(&graph, query)?.ft_states();

    let same_value = if !is_commutative_query(a, query)? {
        PropVerdict::not_applicable("query is not commutative")
    } else {
        match ft.iter().find(|&&s| query.class(s) != query.class(ft[0])) {
            Some(&other) => {
                PropVerdict::fail(vec![ft[0], other], "free states with different values")
            }
            None => PropVerdict::Pass,
        }
    };
    let ft_reachable = if !is_commutative_update(a) {
        PropVerdict::not_applicable("update is not commutative")
    } else if ft.is_empty() {
        PropVerdict::not_applicable("no free termination states")
    } else {
        let reaches = graph.backward_closure(ft.iter().copied());
        let stuck: Vec<StateId> = a.states().filter(|s| !reaches[s.index()]).collect();
        if stuck.is_empty() {
            PropVerdict::Pass
        } else {
            PropVerdict::fail(stuck, "states that cannot reach a free state")
        }
    };
    Ok(CommutativityVerdict {
        same_value,
        ft_reachable,
    })
}
