//! Algebraic structure of a semiautomaton and what it implies for free
//! termination: acyclicity and the natural order, inflationary updates,
//! monotone queries, threshold queries, join-semilattices, identity states
//! and commutativity.

mod commute;
mod group;
mod semilattice;
mod threshold;

use std::collections::BTreeMap;

use serde::Serialize;

pub use commute::{
    check_commutativity_ft_props, is_commutative_query, is_commutative_query_with_bound,
    is_commutative_update, update_commutativity_counterexample, CommutativityVerdict,
    DEFAULT_QUERY_COMMUTATIVITY_BOUND,
};
pub use group::{all_invertible, check_inverse_curse, identity_states};
pub use semilattice::{
    check_semilattice_ft_props, is_join_semilattice, join_table, JoinTable, SemilatticeVerdict,
};
pub use threshold::{
    check_antichain_property, check_maximal_states_ft, check_threshold_ft, check_top_in_range_ft,
    extract_antichain, ft_of_threshold, minimal_true_states, threshold_query,
};

use crate::automaton::{Semiautomaton, StateId};
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;
use crate::order::PartialOrder;
use crate::query::{Query, ValueOrder};

/// Result of checking one proposition on a concrete system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PropVerdict {
    Pass,
    Fail {
        states: Vec<StateId>,
        detail: String,
    },
    NotApplicable {
        reason: String,
    },
}

impl PropVerdict {
    pub fn fail(states: Vec<StateId>, detail: impl Into<String>) -> Self {
        PropVerdict::Fail {
            states,
            detail: detail.into(),
        }
    }

    pub fn not_applicable(reason: impl Into<String>) -> Self {
        PropVerdict::NotApplicable {
            reason: reason.into(),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, PropVerdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, PropVerdict::Fail { .. })
    }
}

/// `G[S]` has no cycles other than self-loops.
pub fn is_acyclic(graph: &TransitionGraph) -> bool {
    graph.num_sccs() == graph.num_states()
}

/// The reachability order `s ⊑ t ⇔ s ↠ t`; only a partial order when the
/// graph is acyclic.
pub fn natural_order(graph: &TransitionGraph) -> Result<PartialOrder> {
    if !is_acyclic(graph) {
        return Err(Error::precondition(
            "transition graph has a cycle, so reachability is not antisymmetric",
        ));
    }
    Ok(PartialOrder::reachability(graph))
}

/// Every edge `s -> s'` satisfies `s ⊑ s'`.
pub fn is_inflationary(graph: &TransitionGraph, order: &PartialOrder) -> bool {
    graph
        .states()
        .all(|s| graph.targets(s).iter().all(|&t| order.le(s, StateId(t))))
}

/// Every edge `s -> s'` satisfies `s' ⊑ s`.
pub fn is_deflationary(graph: &TransitionGraph, order: &PartialOrder) -> bool {
    graph
        .states()
        .all(|s| graph.targets(s).iter().all(|&t| order.le(StateId(t), s)))
}

fn comparable_pairs_hold(
    order_d: &PartialOrder,
    mut check: impl FnMut(StateId, StateId) -> Result<bool>,
) -> Result<bool> {
    for a in order_d.elements() {
        for b in order_d.elements() {
            if a != b && order_d.le(a, b) && !check(a, b)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `s ⊑_D s'` implies `Q(s) ⊑_R Q(s')`, checked over every comparable pair.
pub fn is_monotone_query(
    query: &Query,
    order_d: &PartialOrder,
    order_r: &ValueOrder,
) -> Result<bool> {
    query.check_len(order_d.size())?;
    for v in query.distinct_values() {
        order_r.le(v, v)?;
    }
    comparable_pairs_hold(order_d, |a, b| order_r.le(query.value(a), query.value(b)))
}

/// `s ⊑_D s'` implies `Q(s') ⊑_R Q(s)`.
pub fn is_antitone_query(
    query: &Query,
    order_d: &PartialOrder,
    order_r: &ValueOrder,
) -> Result<bool> {
    query.check_len(order_d.size())?;
    for v in query.distinct_values() {
        order_r.le(v, v)?;
    }
    comparable_pairs_hold(order_d, |a, b| order_r.le(query.value(b), query.value(a)))
}

/// Summary of the algebraic properties of one `(S, Q)` pair.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct AlgebraReport {
    pub acyclic: bool,
    /// Inflationary verdict per order it was checked against.
    pub inflationary_wrt: BTreeMap<String, bool>,
    pub identity_states: Vec<String>,
    pub all_invertible: bool,
    /// `None` when the graph is cyclic (no natural order) or too large.
    pub is_join_semilattice: Option<bool>,
    /// Checked on single labels, which covers all sequences by induction.
    pub commutative_update: bool,
    /// Decided exactly over all sequence pairs.
    pub commutative_query: bool,
}

pub fn algebra_report(
    automaton: &Semiautomaton,
    graph: &TransitionGraph,
    query: &Query,
) -> Result<AlgebraReport> {
    query.check_len(graph.num_states())?;
    let acyclic = is_acyclic(graph);
    let mut inflationary_wrt = BTreeMap::new();
    let mut semilattice = None;
    if acyclic {
        let order = natural_order(graph)?;
        inflationary_wrt.insert("natural".to_owned(), is_inflationary(graph, &order));
        semilattice = match is_join_semilattice(&order) {
            Ok(b) => Some(b),
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(AlgebraReport {
        acyclic,
        inflationary_wrt,
        identity_states: identity_states(graph)
            .into_iter()
            .map(|s| automaton.state_name(s))
            .collect(),
        all_invertible: all_invertible(graph),
        is_join_semilattice: semilattice,
        commutative_update: is_commutative_update(automaton),
        commutative_query: is_commutative_query(automaton, query)?,
    })
}
