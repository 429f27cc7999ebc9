//! Partial orders over the state space and antichains within them.

use std::sync::Arc;

use crate::automaton::StateId;
use crate::error::{Error, Result};
use crate::graph::TransitionGraph;

/// Above this many states, reachability orders are answered by search
/// instead of a precomputed bit matrix.
pub const DENSE_ORDER_CAP: usize = 4096;

/// Square bit matrix, row `i` holds the elements above `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// `row(dst) |= row(src)`.
    pub fn or_row(&mut self, dst: usize, src: usize) {
        if dst == src {
            return;
        }
        let w = self.words;
        let (a, b) = if dst < src {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&mut lo[dst * w..(dst + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..(src + 1) * w])
        };
        for (x, y) in a.iter_mut().zip(b) {
            *x |= *y;
        }
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn size(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Matrix(BitMatrix),
    Reach(Arc<TransitionGraph>),
}

/// A partial order `⊑` on `D`.
#[derive(Clone, Debug)]
pub struct PartialOrder {
    n: usize,
    repr: Repr,
}

impl PartialOrder {
    /// Builds an order from a predicate and validates reflexivity,
    /// antisymmetry and transitivity.
    pub fn from_fn(n: usize, mut le: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        if n > DENSE_ORDER_CAP {
            return Err(Error::cap(
                "explicit order size",
                n as u128,
                DENSE_ORDER_CAP as u128,
            ));
        }
        let mut m = BitMatrix::new(n);
        for i in 0..n {
            for j in 0..n {
                if le(i, j) {
                    m.set(i, j);
                }
            }
        }
        let order = PartialOrder {
            n,
            repr: Repr::Matrix(m),
        };
        order.validate()?;
        Ok(order)
    }

    /// Only `s ⊑ s`.
    pub fn discrete(n: usize) -> Result<Self> {
        PartialOrder::from_fn(n, |a, b| a == b)
    }

    /// Reachability order `s ⊑ t ⇔ s ↠ t`. Only antisymmetric when the
    /// graph is acyclic; callers check that first.
    pub(crate) fn reachability(graph: &TransitionGraph) -> Self {
        let n = graph.num_states();
        if n > DENSE_ORDER_CAP {
            return PartialOrder {
                n,
                repr: Repr::Reach(Arc::new(graph.clone())),
            };
        }
        // Sinks first: the row of an SCC's first member is its own members
        // plus the rows of its successors' first members.
        let mut m = BitMatrix::new(n);
        for c in 0..graph.num_sccs() {
            let members = graph.scc_members(c);
            let rep = members[0].index();
            for t in members {
                m.set(rep, t.index());
            }
            for &d in graph.scc_successors(c) {
                m.or_row(rep, graph.scc_members(d as usize)[0].index());
            }
            for t in &members[1..] {
                m.or_row(t.index(), rep);
            }
        }
        PartialOrder {
            n,
            repr: Repr::Matrix(m),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `a ⊑ b`.
    pub fn le(&self, a: StateId, b: StateId) -> bool {
        match &self.repr {
            Repr::Matrix(m) => m.get(a.index(), b.index()),
            Repr::Reach(g) => a == b || g.bfs(a, None)[b.index()],
        }
    }

    pub fn lt(&self, a: StateId, b: StateId) -> bool {
        a != b && self.le(a, b)
    }

    pub fn comparable(&self, a: StateId, b: StateId) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// The bit matrix, when this order is stored densely.
    pub fn matrix(&self) -> Option<&BitMatrix> {
        match &self.repr {
            Repr::Matrix(m) => Some(m),
            Repr::Reach(_) => None,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = StateId> {
        (0..self.n).map(StateId::from_index)
    }

    pub fn is_maximal(&self, s: StateId) -> bool {
        match &self.repr {
            Repr::Matrix(m) => m.row_count(s.index()) == 1,
            Repr::Reach(g) => g.targets(s).iter().all(|&t| t == s.0),
        }
    }

    pub fn is_minimal(&self, s: StateId) -> bool {
        match &self.repr {
            Repr::Matrix(m) => (0..self.n).all(|i| i == s.index() || !m.get(i, s.index())),
            Repr::Reach(g) => g.predecessors(s).all(|(p, _)| p == s),
        }
    }

    /// States `t` with `c ⊑ t` for some `c` in `base`, as a membership vector.
    pub fn upward_closure(&self, base: &[StateId]) -> Vec<bool> {
        let mut up = vec![false; self.n];
        match &self.repr {
            Repr::Matrix(m) => {
                for &c in base {
                    for (t, u) in up.iter_mut().enumerate() {
                        *u |= m.get(c.index(), t);
                    }
                }
            }
            Repr::Reach(g) => {
                for &c in base {
                    for (u, r) in up.iter_mut().zip(g.bfs(c, None)) {
                        *u |= r;
                    }
                }
            }
        }
        up
    }

    /// Exhaustive check of the partial-order axioms.
    pub fn validate(&self) -> Result<()> {
        let Repr::Matrix(m) = &self.repr else {
            return Ok(());
        };
        let n = self.n;
        for i in 0..n {
            if !m.get(i, i) {
                return Err(Error::malformed(format!("order is not reflexive at {i}")));
            }
            for j in (i + 1)..n {
                if m.get(i, j) && m.get(j, i) {
                    return Err(Error::malformed(format!(
                        "order is not antisymmetric: {i} and {j}"
                    )));
                }
            }
        }
        // transitive iff a ⊑ b implies up(b) ⊆ up(a)
        for a in 0..n {
            for b in 0..n {
                if m.get(a, b) {
                    let (ra, rb) = (m.row(a), m.row(b));
                    if ra.iter().zip(rb).any(|(x, y)| y & !x != 0) {
                        return Err(Error::malformed(format!(
                            "order is not transitive through {a} ⊑ {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A set of pairwise incomparable states, sorted by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antichain {
    elements: Vec<StateId>,
}

impl Antichain {
    pub fn new(order: &PartialOrder, mut elements: Vec<StateId>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        for &e in &elements {
            if e.index() >= order.size() {
                return Err(Error::InvalidState {
                    state: e.index(),
                    num_states: order.size(),
                });
            }
        }
        for (i, &a) in elements.iter().enumerate() {
            for &b in &elements[i + 1..] {
                if order.comparable(a, b) {
                    return Err(Error::malformed(format!(
                        "{a} and {b} are comparable, not an antichain"
                    )));
                }
            }
        }
        Ok(Antichain { elements })
    }

    pub fn elements(&self) -> &[StateId] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}
