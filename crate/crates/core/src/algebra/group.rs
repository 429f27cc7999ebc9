//! Identity states, invertibility and the inverse curse.

use super::PropVerdict;
use crate::automaton::StateId;
use crate::error::Result;
use crate::ft::all_ft_states;
use crate::graph::TransitionGraph;
use crate::query::Query;

/// States that reach every state, sorted by index.
///
/// Every state is reachable from some source of the condensation, so
/// identity states exist only when there is exactly one source SCC, and then
/// they are its members.
pub fn identity_states(graph: &TransitionGraph) -> Vec<StateId> {
    let k = graph.num_sccs();
    let mut has_pred = vec![false; k];
    for c in 0..k {
        for &d in graph.scc_successors(c) {
            has_pred[d as usize] = true;
        }
    }
    let mut sources = (0..k).filter(|&c| !has_pred[c]);
    match (sources.next(), sources.next()) {
        (Some(c), None) => {
            let mut ids = graph.scc_members(c).to_vec();
            ids.sort_unstable();
            ids
        }
        _ => Vec::new(),
    }
}

/// Every state reaches an identity state. Identity states form the source
/// SCC, so this holds exactly when the graph is strongly connected.
pub fn all_invertible(graph: &TransitionGraph) -> bool {
    graph.num_sccs() <= 1
}

/// When every state is invertible, a non-constant query has no free
/// termination states.
pub fn check_inverse_curse(graph: &TransitionGraph, query: &Query) -> Result<PropVerdict> {
    query.check_len(graph.num_states())?;
    if !all_invertible(graph) {
        return Ok(PropVerdict::not_applicable("not every state is invertible"));
    }
    if query.is_constant() {
        return Ok(PropVerdict::not_applicable("query is constant"));
    }
    let ft = all_ft_states(graph, query)?.ft_states();
    Ok(if ft.is_empty() {
        PropVerdict::Pass
    } else {
        PropVerdict::fail(ft, "free states in a fully invertible system")
    })
}
