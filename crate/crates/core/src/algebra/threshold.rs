//! Threshold queries, antichains of free states, and the sufficient
//! conditions for free termination under inflationary updates.

use super::{
    is_acyclic, is_antitone_query, is_deflationary, is_inflationary, is_monotone_query,
    natural_order, PropVerdict,
};
use crate::automaton::StateId;
use crate::error::{Error, Result};
use crate::ft::{all_ft_states, FtVerdict};
use crate::graph::TransitionGraph;
use crate::order::{Antichain, PartialOrder};
use crate::query::{Query, Value, ValueOrder};

/// `Q_C(s) = ⋁_{c ∈ C} (c ⊑ s)`.
pub fn threshold_query(order: &PartialOrder, antichain: &Antichain) -> Query {
    let up = order.upward_closure(antichain.elements());
    Query::from_bools(&up)
}

/// Free states of the threshold query `Q_C` on an inflationary system.
///
/// Every state at or above `C` is free. A state below the threshold is free
/// only when it cannot reach the threshold at all (its whole closure stays
/// false); when every state can reach the threshold, the result is exactly
/// the upward closure of `C`. Sorted by index.
pub fn ft_of_threshold(
    graph: &TransitionGraph,
    order: &PartialOrder,
    antichain: &Antichain,
) -> Result<Vec<StateId>> {
    if order.size() != graph.num_states() {
        return Err(Error::malformed("order and graph have different sizes"));
    }
    if !is_inflationary(graph, order) {
        return Err(Error::precondition(
            "graph is not inflationary w.r.t. the order",
        ));
    }
    let up = order.upward_closure(antichain.elements());
    let reaches_up = graph.backward_closure(graph.states().filter(|s| up[s.index()]));
    let ft: Vec<StateId> = graph
        .states()
        .filter(|s| up[s.index()] || !reaches_up[s.index()])
        .collect();
    debug_assert_eq!(
        ft,
        all_ft_states(graph, &Query::from_bools(&up))
            .map(|v| v.ft_states())
            .unwrap_or_default()
    );
    Ok(ft)
}

/// Minimal states of a set that is upward closed under reachability in an
/// acyclic graph: members with no member predecessor other than themselves.
fn minimal_members(graph: &TransitionGraph, member: impl Fn(StateId) -> bool) -> Vec<StateId> {
    graph
        .states()
        .filter(|&s| member(s) && graph.predecessors(s).all(|(p, _)| p == s || !member(p)))
        .collect()
}

/// The minimal free termination states under the natural order. On an
/// acyclic graph they form an antichain `C` such that `Q(s) = Q(c)`
/// whenever `c ⊑ s`; that property is re-verified before returning.
pub fn extract_antichain(graph: &TransitionGraph, query: &Query) -> Result<Antichain> {
    let order = natural_order(graph)?;
    let verdict = all_ft_states(graph, query)?;
    extract_antichain_with(graph, query, &order, &verdict)
}

pub(crate) fn extract_antichain_with(
    graph: &TransitionGraph,
    query: &Query,
    order: &PartialOrder,
    verdict: &FtVerdict,
) -> Result<Antichain> {
    if verdict.num_ft() == 0 {
        return Err(Error::precondition(
            "query has no free termination states, so no threshold antichain exists",
        ));
    }
    // Free states are closed under reachability, so a free state with a
    // free predecessor is not minimal.
    let minimal = minimal_members(graph, |s| verdict.is_ft(s));
    let chain = Antichain::new(order, minimal)?;
    for &c in chain.elements() {
        let reach = graph.bfs(c, None);
        if let Some(s) = graph
            .states()
            .find(|s| reach[s.index()] && query.class(*s) != query.class(c))
        {
            return Err(Error::malformed(format!(
                "antichain element {c} reaches {s} with a different value"
            )));
        }
    }
    Ok(chain)
}

/// Minimal states where a Boolean query is true, under the natural order.
pub fn minimal_true_states(graph: &TransitionGraph, query: &Query) -> Result<Vec<StateId>> {
    if !is_acyclic(graph) {
        return Err(Error::precondition("graph is cyclic"));
    }
    query.check_len(graph.num_states())?;
    let t = Value::Bool(true);
    let holds: Vec<bool> = graph.states().map(|s| *query.value(s) == t).collect();
    // strictly above a true state: reached through a non-loop edge
    let above = graph.forward_closure(graph.states().filter(|s| holds[s.index()]).flat_map(|s| {
        graph
            .targets(s)
            .iter()
            .filter(move |&&n| n != s.0)
            .map(|&n| StateId(n))
    }));
    Ok(graph
        .states()
        .filter(|s| holds[s.index()] && !above[s.index()])
        .collect())
}

/// Inflationary (deflationary) system: every maximal (minimal) element is a
/// free termination state.
pub fn check_maximal_states_ft(
    graph: &TransitionGraph,
    order: &PartialOrder,
    query: &Query,
) -> Result<PropVerdict> {
    let verdict = all_ft_states(graph, query)?;
    let (extreme, what): (Box<dyn Fn(StateId) -> bool>, _) = if is_inflationary(graph, order) {
        (Box::new(|s| order.is_maximal(s)), "maximal")
    } else if is_deflationary(graph, order) {
        (Box::new(|s| order.is_minimal(s)), "minimal")
    } else {
        return Ok(PropVerdict::not_applicable(
            "system is neither inflationary nor deflationary w.r.t. the order",
        ));
    };
    let bad: Vec<StateId> = graph
        .states()
        .filter(|&s| extreme(s) && !verdict.is_ft(s))
        .collect();
    Ok(if bad.is_empty() {
        PropVerdict::Pass
    } else {
        PropVerdict::fail(bad, format!("{what} elements that are not free"))
    })
}

/// Inflationary system with a monotone (antitone) query: states whose value
/// is maximal (minimal) in the result order are free.
pub fn check_top_in_range_ft(
    graph: &TransitionGraph,
    order_d: &PartialOrder,
    query: &Query,
    order_r: &ValueOrder,
) -> Result<PropVerdict> {
    if !is_inflationary(graph, order_d) {
        return Ok(PropVerdict::not_applicable("system is not inflationary"));
    }
    let monotone = is_monotone_query(query, order_d, order_r)?;
    let antitone = is_antitone_query(query, order_d, order_r)?;
    if !monotone && !antitone {
        return Ok(PropVerdict::not_applicable(
            "query is neither monotone nor antitone",
        ));
    }
    let verdict = all_ft_states(graph, query)?;
    let mut bad = Vec::new();
    for s in graph.states() {
        let v = query.value(s);
        let extreme =
            (monotone && order_r.is_maximal(v)?) || (antitone && order_r.is_minimal(v)?);
        if extreme && !verdict.is_ft(s) {
            bad.push(s);
        }
    }
    Ok(if bad.is_empty() {
        PropVerdict::Pass
    } else {
        PropVerdict::fail(bad, "states with an extreme query value that are not free")
    })
}

/// For an inflationary system: every state at or above `C` is a free state
/// of `Q_C`, and the free set matches [`ft_of_threshold`].
pub fn check_threshold_ft(
    graph: &TransitionGraph,
    order: &PartialOrder,
    antichain: &Antichain,
) -> Result<PropVerdict> {
    if !is_inflationary(graph, order) {
        return Ok(PropVerdict::not_applicable("system is not inflationary"));
    }
    let verdict = all_ft_states(graph, &threshold_query(order, antichain))?;
    let up = order.upward_closure(antichain.elements());
    let not_free: Vec<StateId> = graph
        .states()
        .filter(|s| up[s.index()] && !verdict.is_ft(*s))
        .collect();
    if !not_free.is_empty() {
        return Ok(PropVerdict::fail(
            not_free,
            "states at or above C that are not free",
        ));
    }
    let predicted = ft_of_threshold(graph, order, antichain)?;
    let actual = verdict.ft_states();
    if predicted == actual {
        return Ok(PropVerdict::Pass);
    }
    let diff: Vec<StateId> = graph
        .states()
        .filter(|s| predicted.contains(s) != actual.contains(s))
        .collect();
    Ok(PropVerdict::fail(
        diff,
        "free states differ from the predicted set",
    ))
}

/// Acyclic system with at least one free state: the minimal free states form
/// an antichain governing every state above it.
pub fn check_antichain_property(graph: &TransitionGraph, query: &Query) -> Result<PropVerdict> {
    if !is_acyclic(graph) {
        return Ok(PropVerdict::not_applicable("graph is cyclic"));
    }
    let order = natural_order(graph)?;
    let verdict = all_ft_states(graph, query)?;
    if verdict.num_ft() == 0 {
        return Ok(PropVerdict::not_applicable("no free termination states"));
    }
    match extract_antichain_with(graph, query, &order, &verdict) {
        Ok(_) => Ok(PropVerdict::Pass),
        Err(Error::Malformed(detail)) => Ok(PropVerdict::fail(Vec::new(), detail)),
        Err(e) => Err(e),
    }
}
