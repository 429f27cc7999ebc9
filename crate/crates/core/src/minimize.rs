//! Query-preserving collapsing, Moore minimization and equivalence checks.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::algebra::PropVerdict;
use crate::automaton::{LabelId, Semiautomaton, StateId};
use crate::error::{Error, Result};
use crate::ft::{all_ft_states, is_ft_state};
use crate::graph::{build_graph, TransitionGraph};
use crate::query::Query;

/// Where each original state ended up; `None` for states that were dropped
/// as unreachable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseMap {
    pub old_to_new: Vec<Option<StateId>>,
    pub new_states: usize,
}

impl CollapseMap {
    pub fn image(&self, s: StateId) -> Option<StateId> {
        self.old_to_new.get(s.index()).copied().flatten()
    }

    /// Original states merged into `t`.
    pub fn preimage(&self, t: StateId) -> Vec<StateId> {
        self.old_to_new
            .iter()
            .enumerate()
            .filter(|(_, n)| **n == Some(t))
            .map(|(i, _)| StateId::from_index(i))
            .collect()
    }

    fn then(&self, next: &CollapseMap) -> CollapseMap {
        CollapseMap {
            old_to_new: self
                .old_to_new
                .iter()
                .map(|n| n.and_then(|t| next.image(t)))
                .collect(),
            new_states: next.new_states,
        }
    }
}

/// A quotient machine, its query and the state mapping.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub automaton: Semiautomaton,
    pub query: Query,
    pub map: CollapseMap,
}

/// Builds the quotient whose state `b` is block `b`. Each block's
/// transitions are read off its lowest-index member, so callers must only
/// merge states whose successors land in the same blocks.
fn quotient(a: &Semiautomaton, q: &Query, block_of: &[u32], num_blocks: usize) -> Result<Quotient> {
    let mut rep = vec![u32::MAX; num_blocks];
    for (s, &b) in block_of.iter().enumerate() {
        if rep[b as usize] == u32::MAX {
            rep[b as usize] = s as u32;
        }
    }
    let rows: Vec<Vec<usize>> = rep
        .iter()
        .map(|&r| {
            a.row(StateId(r))
                .iter()
                .map(|&t| block_of[t as usize] as usize)
                .collect()
        })
        .collect();
    let start = a.start().map(|s| block_of[s.index()] as usize);
    let mut out = Semiautomaton::new(num_blocks, a.labels().to_vec(), rows, start)?;
    if a.state_names().is_some() {
        out = out.with_state_names(rep.iter().map(|&r| a.state_name(StateId(r))).collect())?;
    }
    let mut query = Query::from_fn(num_blocks, |b| q.value(StateId(rep[b])).clone());
    if let Some(order) = q.order() {
        query = query.with_order(order.clone())?;
    }
    Ok(Quotient {
        automaton: out,
        query,
        map: CollapseMap {
            old_to_new: block_of.iter().map(|&b| Some(StateId(b))).collect(),
            new_states: num_blocks,
        },
    })
}

/// Renumbers blocks by first appearance in state-index order.
fn renumber_by_index(block_of: &mut [u32]) -> usize {
    let mut fresh: HashMap<u32, u32> = HashMap::new();
    for b in block_of.iter_mut() {
        let next = fresh.len() as u32;
        *b = *fresh.entry(*b).or_insert(next);
    }
    fresh.len()
}

/// Merges `U^∞(s)` into one state with only self-loops. The merged state
/// takes the slot of the lowest index in the closure; other states keep
/// their relative order.
pub fn collapse_closure(a: &Semiautomaton, q: &Query, s: StateId) -> Result<Quotient> {
    q.check_len(a.num_states())?;
    a.check_state(s)?;
    if a.start().is_none() {
        return Err(Error::precondition("automaton has no start state"));
    }
    let graph = build_graph(a);
    if !is_ft_state(&graph, q, s)?.is_free() {
        return Err(Error::precondition(format!(
            "{} is not a free termination state, collapsing it would change query results",
            a.state_name(s)
        )));
    }
    let closure = graph.bfs(s, None);
    let merged = closure.iter().position(|&c| c).unwrap_or(s.index()) as u32;
    let mut block_of: Vec<u32> = (0..a.num_states() as u32)
        .map(|i| if closure[i as usize] { merged } else { i })
        .collect();
    let n = renumber_by_index(&mut block_of);
    quotient(a, q, &block_of, n)
}

/// Collapses free termination states until nothing changes.
///
/// Free states only step to free states with the same value, and repeated
/// collapsing merges every weakly connected region of them. The fixpoint is
/// computed directly with a union-find over those regions.
pub fn collapse_fixpoint(a: &Semiautomaton, q: &Query) -> Result<Quotient> {
    q.check_len(a.num_states())?;
    if a.start().is_none() {
        return Err(Error::precondition("automaton has no start state"));
    }
    let graph = build_graph(a);
    let verdict = all_ft_states(&graph, q)?;
    let mut uf = UnionFind::new(a.num_states());
    for s in graph.states().filter(|&s| verdict.is_ft(s)) {
        for &t in graph.targets(s) {
            uf.union(s.index(), t as usize);
        }
    }
    let mut block_of: Vec<u32> = (0..a.num_states()).map(|i| uf.find(i) as u32).collect();
    let n = renumber_by_index(&mut block_of);
    quotient(a, q, &block_of, n)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the lower index as root
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
    }
}

/// Coarsest partition of all states that refines `initial` and is stable
/// under every label (Hopcroft). Two states share a block iff every label
/// sequence leads them to states of the same initial class.
pub fn moore_partition(a: &Semiautomaton, initial: &[u32]) -> Vec<u32> {
    let n = a.num_states();
    let k = a.num_labels();
    assert_eq!(initial.len(), n, "initial partition length");
    if n == 0 {
        return Vec::new();
    }

    // inverse transitions, bucketed by (target, label)
    let mut off = vec![0u32; n * k + 1];
    for (i, &t) in a.table().iter().enumerate() {
        off[t as usize * k + i % k + 1] += 1;
    }
    for i in 0..n * k {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut inv = vec![0u32; n * k];
    for (i, &t) in a.table().iter().enumerate() {
        let slot = &mut fill[t as usize * k + i % k];
        inv[*slot as usize] = (i / k) as u32;
        *slot += 1;
    }

    // blocks are contiguous ranges of `elems`
    let mut elems: Vec<u32> = (0..n as u32).collect();
    elems.sort_by_key(|&s| initial[s as usize]);
    let mut pos = vec![0u32; n];
    let mut block_of = vec![0u32; n];
    let mut start: Vec<u32> = Vec::new();
    let mut end: Vec<u32> = Vec::new();
    for (i, &s) in elems.iter().enumerate() {
        pos[s as usize] = i as u32;
        if i == 0 || initial[s as usize] != initial[elems[i - 1] as usize] {
            if i > 0 {
                end.push(i as u32);
            }
            start.push(i as u32);
        }
        block_of[s as usize] = start.len() as u32 - 1;
    }
    end.push(n as u32);

    let mut pending: Vec<bool> = Vec::new();
    let mut work: Vec<(u32, u32)> = Vec::new();
    let largest = (0..start.len())
        .max_by_key(|&b| end[b] - start[b])
        .unwrap_or(0);
    for b in 0..start.len() {
        for l in 0..k {
            pending.push(b != largest);
            if b != largest {
                work.push((b as u32, l as u32));
            }
        }
    }

    let mut marked = vec![0u32; start.len()];
    let mut touched: Vec<u32> = Vec::new();
    let mut splitter: Vec<u32> = Vec::new();
    while let Some((b, l)) = work.pop() {
        pending[b as usize * k + l as usize] = false;
        splitter.clear();
        for i in start[b as usize]..end[b as usize] {
            let t = elems[i as usize] as usize;
            let idx = t * k + l as usize;
            splitter.extend_from_slice(&inv[off[idx] as usize..off[idx + 1] as usize]);
        }
        for &s in &splitter {
            let blk = block_of[s as usize] as usize;
            let p = pos[s as usize];
            let boundary = start[blk] + marked[blk];
            if p < boundary {
                continue; // already marked
            }
            let other = elems[boundary as usize];
            elems.swap(p as usize, boundary as usize);
            pos[other as usize] = p;
            pos[s as usize] = boundary;
            if marked[blk] == 0 {
                touched.push(blk as u32);
            }
            marked[blk] += 1;
        }
        for &blk in &touched {
            let blk = blk as usize;
            let m = marked[blk];
            marked[blk] = 0;
            if m == end[blk] - start[blk] {
                continue;
            }
            // the marked prefix becomes a new block
            let nb = start.len();
            start.push(start[blk]);
            end.push(start[blk] + m);
            start[blk] += m;
            marked.push(0);
            for i in start[nb]..end[nb] {
                block_of[elems[i as usize] as usize] = nb as u32;
            }
            let smaller = if end[nb] - start[nb] <= end[blk] - start[blk] {
                nb
            } else {
                blk
            };
            for l in 0..k {
                pending.push(false);
                if pending[blk * k + l] {
                    pending[nb * k + l] = true;
                    work.push((nb as u32, l as u32));
                } else {
                    pending[smaller * k + l] = true;
                    work.push((smaller as u32, l as u32));
                }
            }
        }
        touched.clear();
    }
    block_of
}

/// Minimal Moore machine equivalent to `(a, q)` from the start state.
///
/// States unreachable from the start are dropped first. Result states are
/// numbered in breadth-first order from the start, trying labels in order,
/// so equivalent inputs give identical outputs.
pub fn minimize_moore(a: &Semiautomaton, q: &Query) -> Result<Quotient> {
    q.check_len(a.num_states())?;
    if a.start().is_none() {
        return Err(Error::precondition("automaton has no start state"));
    }
    let (reachable, strip) = if a.start_reaches_all() {
        let identity = CollapseMap {
            old_to_new: a.states().map(Some).collect(),
            new_states: a.num_states(),
        };
        (a.clone(), identity)
    } else {
        let dropped = a.unreachable_from_start().len();
        log::warn!("dropping {dropped} states unreachable from the start state before minimizing");
        let (r, map) = a.restrict_to_reachable()?;
        let new_states = r.num_states();
        (
            r,
            CollapseMap {
                old_to_new: map,
                new_states,
            },
        )
    };
    let rq = {
        let mut values = vec![None; reachable.num_states()];
        for (old, new) in strip.old_to_new.iter().enumerate() {
            if let Some(t) = new {
                values[t.index()] = Some(q.value(StateId::from_index(old)).clone());
            }
        }
        let rq = Query::new(
            values
                .into_iter()
                .map(|v| v.expect("every kept state has a preimage"))
                .collect(),
        );
        match q.order() {
            Some(o) => rq.with_order(o.clone())?,
            None => rq,
        }
    };

    let blocks = moore_partition(&reachable, rq.classes());
    // canonical numbering: BFS over blocks from the start
    let rstart = reachable.start().expect("start kept");
    let mut order = vec![u32::MAX; reachable.num_states()];
    let mut next = 0u32;
    let mut queue = VecDeque::from([rstart]);
    let mut seen = vec![false; reachable.num_states()];
    seen[rstart.index()] = true;
    while let Some(s) = queue.pop_front() {
        let b = blocks[s.index()] as usize;
        if order[b] == u32::MAX {
            order[b] = next;
            next += 1;
        }
        for &t in reachable.row(s) {
            if !seen[t as usize] {
                seen[t as usize] = true;
                queue.push_back(StateId(t));
            }
        }
    }
    let block_of: Vec<u32> = blocks.iter().map(|&b| order[b as usize]).collect();
    let mut out = quotient(&reachable, &rq, &block_of, next as usize)?;
    out.map = strip.then(&out.map);
    Ok(out)
}

/// `None` when both machines give the same query result after every label
/// sequence from their start states, otherwise a shortest sequence on which
/// they differ. Labels are matched by name.
pub fn check_equivalence(
    a1: &Semiautomaton,
    q1: &Query,
    a2: &Semiautomaton,
    q2: &Query,
) -> Result<Option<Vec<LabelId>>> {
    q1.check_len(a1.num_states())?;
    q2.check_len(a2.num_states())?;
    let (Some(s1), Some(s2)) = (a1.start(), a2.start()) else {
        return Err(Error::precondition("both automata need a start state"));
    };
    let mut names1: Vec<&String> = a1.labels().iter().collect();
    let mut names2: Vec<&String> = a2.labels().iter().collect();
    names1.sort();
    names2.sort();
    if names1 != names2 {
        return Err(Error::precondition("label sets differ"));
    }
    // label l of a1 is label relabel[l] of a2
    let relabel: Vec<LabelId> = a1
        .labels()
        .iter()
        .map(|name| a2.label_by_name(name).expect("label sets match"))
        .collect();

    let mut index: HashMap<(u32, u32), usize> = HashMap::new();
    let mut parent: Vec<(usize, LabelId)> = Vec::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    index.insert((s1.0, s2.0), 0);
    parent.push((usize::MAX, LabelId(0)));
    pairs.push((s1, s2));
    let mut head = 0;
    while head < pairs.len() {
        let (p1, p2) = pairs[head];
        if q1.value(p1) != q2.value(p2) {
            let mut seq = Vec::new();
            let mut cur = head;
            while parent[cur].0 != usize::MAX {
                seq.push(parent[cur].1);
                cur = parent[cur].0;
            }
            seq.reverse();
            return Ok(Some(seq));
        }
        for (l, &l2) in relabel.iter().enumerate() {
            let l1 = LabelId::from_index(l);
            let n = (a1.step(p1, l1), a2.step(p2, l2));
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry((n.0 .0, n.1 .0)) {
                e.insert(pairs.len());
                parent.push((head, l1));
                pairs.push(n);
            }
        }
        head += 1;
    }
    Ok(None)
}

/// A shortest cycle through `s` that leaves `s`, if one exists.
fn cycle_through(graph: &TransitionGraph, s: StateId) -> Option<Vec<StateId>> {
    let c = graph.scc_of(s);
    if graph.scc_members(c).len() < 2 {
        return None;
    }
    let mut parent: HashMap<StateId, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    for &t in graph.targets(s) {
        let t = StateId(t);
        if t != s && graph.scc_of(t) == c && !parent.contains_key(&t) {
            parent.insert(t, s);
            queue.push_back(t);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &t in graph.targets(u) {
            let t = StateId(t);
            if t == s {
                let mut path = vec![u];
                let mut cur = u;
                while parent[&cur] != s {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.push(s);
                path.reverse();
                return Some(path);
            }
            if graph.scc_of(t) == c && !parent.contains_key(&t) {
                parent.insert(t, u);
                queue.push_back(t);
            }
        }
    }
    None
}

/// In a minimal machine no free state lies on a cycle other than a self-loop.
/// A failure lists one offending cycle, starting at the free state.
pub fn check_minimal_ft_acyclicity(a: &Semiautomaton, q: &Query) -> Result<PropVerdict> {
    q.check_len(a.num_states())?;
    let graph = build_graph(a);
    let verdict = all_ft_states(&graph, q)?;
    for s in verdict.ft_states() {
        if let Some(cycle) = cycle_through(&graph, s) {
            return Ok(PropVerdict::fail(cycle, "free state on a cycle"));
        }
    }
    Ok(PropVerdict::Pass)
}
