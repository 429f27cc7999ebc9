//! Independent oracles for the integration tests. They read only the raw
//! transition table and query values, never the library's analyses.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use freeterm_core::relational::Fact;
use freeterm_core::{LabelId, Query, Semiautomaton, StateId};

pub fn facts(names: &[&str]) -> Vec<Fact> {
    names.iter().map(|n| Fact::parse(n).unwrap()).collect()
}

/// States reachable from `s` by plain breadth-first search over `step`.
pub fn reach(a: &Semiautomaton, s: usize) -> Vec<bool> {
    let mut seen = vec![false; a.num_states()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for l in 0..a.num_labels() {
            let t = a.step(StateId(u as u32), LabelId(l as u32)).index();
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Free termination straight from the definition.
pub fn brute_ft(a: &Semiautomaton, q: &Query) -> Vec<bool> {
    (0..a.num_states())
        .map(|s| {
            let r = reach(a, s);
            (0..a.num_states()).all(|t| !r[t] || q.values()[t] == q.values()[s])
        })
        .collect()
}

pub fn ft_set(bits: &[bool]) -> Vec<usize> {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

pub fn named(a: &Semiautomaton, states: &[usize]) -> Vec<String> {
    states
        .iter()
        .map(|&s| a.state_name(StateId(s as u32)))
        .collect()
}

/// Output signature of `s`: query values after every sequence of length up
/// to `depth`, in a fixed enumeration order.
fn signature(a: &Semiautomaton, q: &Query, s: usize, depth: usize) -> Vec<u32> {
    let mut out = Vec::new();
    let mut frontier = vec![s];
    for _ in 0..=depth {
        let mut next = Vec::with_capacity(frontier.len() * a.num_labels());
        for &u in &frontier {
            out.push(q.classes()[u]);
            for l in 0..a.num_labels() {
                next.push(a.step(StateId(u as u32), LabelId(l as u32)).index());
            }
        }
        frontier = next;
    }
    out
}

/// Myhill–Nerode: number of start-reachable states with pairwise distinct
/// behaviour over sequences up to `depth` labels.
pub fn myhill_nerode_size(a: &Semiautomaton, q: &Query, depth: usize) -> usize {
    let start = a.start().unwrap().index();
    let r = reach(a, start);
    let sigs: BTreeSet<Vec<u32>> = (0..a.num_states())
        .filter(|&s| r[s])
        .map(|s| signature(a, q, s, depth))
        .collect();
    sigs.len()
}

/// Compares outputs along every sequence up to `depth` from both starts.
pub fn same_behaviour(
    a1: &Semiautomaton,
    q1: &Query,
    a2: &Semiautomaton,
    q2: &Query,
    depth: usize,
) -> bool {
    let map: HashMap<&str, usize> = a2
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let l2: Vec<usize> = a1.labels().iter().map(|l| map[l.as_str()]).collect();
    let mut frontier = vec![(a1.start().unwrap().index(), a2.start().unwrap().index())];
    let mut seen = BTreeSet::new();
    for _ in 0..=depth {
        let mut next = Vec::new();
        for &(u, v) in &frontier {
            if q1.values()[u] != q2.values()[v] {
                return false;
            }
            if !seen.insert((u, v)) {
                continue;
            }
            for (l, &m) in l2.iter().enumerate() {
                next.push((
                    a1.step(StateId(u as u32), LabelId(l as u32)).index(),
                    a2.step(StateId(v as u32), LabelId(m as u32)).index(),
                ));
            }
        }
        frontier = next;
    }
    true
}
