//! The labelled transition graph of a semiautomaton, its strongly connected
//! components and the condensation DAG.

use std::collections::VecDeque;

use crate::automaton::{LabelId, Semiautomaton, StateId};
use crate::error::{Error, Result};

/// Labelled directed graph `G[S]` with one edge per `(state, label)` pair.
///
/// SCC ids are assigned in reverse topological order of the condensation:
/// every condensation edge goes from a higher SCC id to a lower one, so
/// iterating ids upward visits sinks first.
#[derive(Clone, Debug)]
pub struct TransitionGraph {
    num_states: usize,
    num_labels: usize,
    // forward edges: row-major copy of the transition table
    succ: Vec<u32>,
    // reverse adjacency in CSR form, entries are (source, label)
    pred_off: Vec<usize>,
    pred: Vec<(u32, u32)>,
    scc_id: Vec<u32>,
    scc_members: Vec<Vec<StateId>>,
    // condensation edges in CSR form, deduplicated, no self edges
    dag_off: Vec<usize>,
    dag: Vec<u32>,
}

/// Builds `G[S]` and its SCC decomposition.
pub fn build_graph(automaton: &Semiautomaton) -> TransitionGraph {
    TransitionGraph::new(automaton)
}

impl TransitionGraph {
    pub fn new(automaton: &Semiautomaton) -> Self {
        let n = automaton.num_states();
        let w = automaton.num_labels();
        let succ = automaton.table().to_vec();

        let mut indeg = vec![0usize; n + 1];
        for &t in &succ {
            indeg[t as usize + 1] += 1;
        }
        for i in 0..n {
            indeg[i + 1] += indeg[i];
        }
        let pred_off = indeg;
        let mut fill = pred_off.clone();
        let mut pred = vec![(0u32, 0u32); succ.len()];
        for s in 0..n {
            for l in 0..w {
                let t = succ[s * w + l] as usize;
                pred[fill[t]] = (s as u32, l as u32);
                fill[t] += 1;
            }
        }

        let (scc_id, num_sccs) = tarjan(n, w, &succ);
        let mut scc_members = vec![Vec::new(); num_sccs];
        for s in 0..n {
            scc_members[scc_id[s] as usize].push(StateId::from_index(s));
        }

        let mut dag_off = Vec::with_capacity(num_sccs + 1);
        let mut dag = Vec::new();
        let mut mark = vec![u32::MAX; num_sccs];
        dag_off.push(0);
        for (c, members) in scc_members.iter().enumerate() {
            let start = dag.len();
            for s in members {
                for &t in &succ[s.index() * w..(s.index() + 1) * w] {
                    let d = scc_id[t as usize];
                    if d as usize != c && mark[d as usize] != c as u32 {
                        mark[d as usize] = c as u32;
                        dag.push(d);
                    }
                }
            }
            dag[start..].sort_unstable();
            dag_off.push(dag.len());
        }

        TransitionGraph {
            num_states: n,
            num_labels: w,
            succ,
            pred_off,
            pred,
            scc_id,
            scc_members,
            dag_off,
            dag,
        }
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Number of labelled edges, `|D|·|L|`.
    pub fn num_edges(&self) -> usize {
        self.succ.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states).map(StateId::from_index)
    }

    /// Outgoing `(label, target)` edges of `s`, self-loops included.
    pub fn edges(&self, s: StateId) -> impl Iterator<Item = (LabelId, StateId)> + '_ {
        self.targets(s)
            .iter()
            .enumerate()
            .map(|(l, &t)| (LabelId::from_index(l), StateId(t)))
    }

    /// Targets of `s` indexed by label.
    #[inline]
    pub fn targets(&self, s: StateId) -> &[u32] {
        let w = self.num_labels;
        &self.succ[s.index() * w..(s.index() + 1) * w]
    }

    /// Incoming `(source, label)` edges of `t`.
    pub fn predecessors(&self, t: StateId) -> impl Iterator<Item = (StateId, LabelId)> + '_ {
        self.pred[self.pred_off[t.index()]..self.pred_off[t.index() + 1]]
            .iter()
            .map(|&(s, l)| (StateId(s), LabelId(l)))
    }

    /// Whether every outgoing edge of `s` is a self-loop.
    pub fn only_self_loops(&self, s: StateId) -> bool {
        self.targets(s).iter().all(|&t| t == s.0)
    }

    #[inline]
    pub fn scc_of(&self, s: StateId) -> usize {
        self.scc_id[s.index()] as usize
    }

    pub fn num_sccs(&self) -> usize {
        self.scc_members.len()
    }

    /// States of SCC `c` in increasing index order.
    pub fn scc_members(&self, c: usize) -> &[StateId] {
        &self.scc_members[c]
    }

    /// Successor SCCs of `c` in the condensation, ascending.
    pub fn scc_successors(&self, c: usize) -> &[u32] {
        &self.dag[self.dag_off[c]..self.dag_off[c + 1]]
    }

    pub fn check_state(&self, s: StateId) -> Result<()> {
        if s.index() < self.num_states {
            Ok(())
        } else {
            Err(Error::InvalidState {
                state: s.index(),
                num_states: self.num_states,
            })
        }
    }

    /// `U^k(s)` when `bound` is given, otherwise the closure `U^∞(s)`.
    /// Returned in increasing index order.
    pub fn reach_set(&self, s: StateId, bound: Option<usize>) -> Result<Vec<StateId>> {
        self.check_state(s)?;
        let seen = self.bfs(s, bound);
        Ok(self.states().filter(|t| seen[t.index()]).collect())
    }

    /// `s ↠ t`.
    pub fn reaches(&self, s: StateId, t: StateId) -> Result<bool> {
        self.check_state(s)?;
        self.check_state(t)?;
        if s == t {
            return Ok(true);
        }
        // Only states in SCCs with id >= scc(t) can reach t; a cheap filter
        // before the search.
        if self.scc_of(s) < self.scc_of(t) {
            return Ok(false);
        }
        Ok(self.bfs(s, None)[t.index()])
    }

    /// Membership vector of the states reachable from `s` within `bound` steps.
    pub fn bfs(&self, s: StateId, bound: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut frontier = vec![s];
        seen[s.index()] = true;
        let mut depth = 0;
        while !frontier.is_empty() && bound.is_none_or(|k| depth < k) {
            let mut next = Vec::new();
            for &u in &frontier {
                for &t in self.targets(u) {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        next.push(StateId(t));
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        seen
    }

    /// Membership vector of every state that reaches some state in `targets`.
    pub fn backward_closure(&self, targets: impl IntoIterator<Item = StateId>) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut queue = VecDeque::new();
        for t in targets {
            if !seen[t.index()] {
                seen[t.index()] = true;
                queue.push_back(t);
            }
        }
        while let Some(t) = queue.pop_front() {
            for (s, _) in self.predecessors(t) {
                if !seen[s.index()] {
                    seen[s.index()] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    /// Membership vector of every state reachable from some state in
    /// `sources`.
    pub fn forward_closure(&self, sources: impl IntoIterator<Item = StateId>) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut queue = VecDeque::new();
        for s in sources {
            if !seen[s.index()] {
                seen[s.index()] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &t in self.targets(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(StateId(t));
                }
            }
        }
        seen
    }

    /// SCCs in topological order of the condensation (sources first).
    pub fn topological_sccs(&self) -> impl Iterator<Item = usize> {
        (0..self.num_sccs()).rev()
    }
}

/// Iterative Tarjan. Returns the SCC id of every state and the SCC count;
/// ids come out in the order components are completed, which is a reverse
/// topological order of the condensation.
fn tarjan(n: usize, w: usize, succ: &[u32]) -> (Vec<u32>, usize) {
    const UNVISITED: u32 = u32::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack: Vec<u32> = Vec::new();
    // (state, next label to explore)
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut num_comps = 0u32;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let v = v as usize;
            if *pos < w {
                let t = succ[v * w + *pos] as usize;
                *pos += 1;
                if index[t] == UNVISITED {
                    index[t] = next_index;
                    low[t] = next_index;
                    next_index += 1;
                    stack.push(t as u32);
                    on_stack[t] = true;
                    call.push((t as u32, 0));
                } else if on_stack[t] {
                    low[v] = low[v].min(index[t]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let u = stack.pop().expect("tarjan stack underflow") as usize;
                    on_stack[u] = false;
                    comp[u] = num_comps;
                    if u == v {
                        break;
                    }
                }
                num_comps += 1;
            }
        }
    }
    (comp, num_comps as usize)
}
