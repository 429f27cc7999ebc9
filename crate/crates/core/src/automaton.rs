//! Finite semiautomata: a state count, a label alphabet and a total
//! transition table.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        debug_assert!(i <= u32::MAX as usize);
        StateId(i as u32)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Dense index of a transition label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(pub u32);

impl LabelId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        LabelId(i as u32)
    }
}

/// Largest state space accepted anywhere in the crate.
pub const MAX_STATES: usize = 1 << 24;

/// A deterministic, total transition system `(D, L, U)` with an optional
/// start state.
///
/// The table is stored row-major: the successor of `s` under `l` lives at
/// `s * num_labels + l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semiautomaton {
    num_states: usize,
    labels: Vec<String>,
    delta: Vec<u32>,
    start: Option<StateId>,
    state_names: Option<Vec<String>>,
}

impl Semiautomaton {
    /// Builds an automaton from one row of targets per state.
    pub fn new(
        num_states: usize,
        labels: Vec<String>,
        rows: Vec<Vec<usize>>,
        start: Option<usize>,
    ) -> Result<Self> {
        if rows.len() != num_states {
            return Err(Error::malformed(format!(
                "delta has {} rows, expected {num_states}",
                rows.len()
            )));
        }
        let width = labels.len();
        let mut delta = Vec::with_capacity(num_states * width);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::malformed(format!(
                    "delta[{s}] has {} entries, expected {width} (one per label)",
                    row.len()
                )));
            }
            for (l, &t) in row.iter().enumerate() {
                if t >= num_states {
                    return Err(Error::malformed(format!(
                        "delta[{s}][{l}] = {t} is not a state (have {num_states})"
                    )));
                }
                delta.push(t as u32);
            }
        }
        Self::from_table(num_states, labels, delta, start)
    }

    /// Builds an automaton by evaluating `f(state, label)` for every pair.
    pub fn from_fn(
        num_states: usize,
        labels: Vec<String>,
        start: Option<usize>,
        mut f: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        let width = labels.len();
        let mut delta = Vec::with_capacity(num_states * width);
        for s in 0..num_states {
            for l in 0..width {
                let t = f(s, l);
                if t >= num_states {
                    return Err(Error::malformed(format!(
                        "transition ({s}, {l}) -> {t} leaves the state space"
                    )));
                }
                delta.push(t as u32);
            }
        }
        Self::from_table(num_states, labels, delta, start)
    }

    fn from_table(
        num_states: usize,
        labels: Vec<String>,
        delta: Vec<u32>,
        start: Option<usize>,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::malformed("a semiautomaton needs at least one state"));
        }
        if num_states > MAX_STATES {
            return Err(Error::cap(
                "state count",
                num_states as u128,
                MAX_STATES as u128,
            ));
        }
        if let Some(s) = start {
            if s >= num_states {
                return Err(Error::InvalidState {
                    state: s,
                    num_states,
                });
            }
        }
        Ok(Semiautomaton {
            num_states,
            labels,
            delta,
            start: start.map(StateId::from_index),
            state_names: None,
        })
    }

    /// Attaches display names for the states.
    pub fn with_state_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_states {
            return Err(Error::malformed(format!(
                "{} state names for {} states",
                names.len(),
                self.num_states
            )));
        }
        self.state_names = Some(names);
        Ok(self)
    }

    pub fn with_start(mut self, start: Option<StateId>) -> Result<Self> {
        if let Some(s) = start {
            self.check_state(s)?;
        }
        self.start = start;
        Ok(self)
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l.index()]
    }

    pub fn label_by_name(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|n| n == name)
            .map(LabelId::from_index)
    }

    #[inline]
    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn state_names(&self) -> Option<&[String]> {
        self.state_names.as_deref()
    }

    /// Display name of a state; `s<i>` when no names are attached.
    pub fn state_name(&self, s: StateId) -> String {
        match &self.state_names {
            Some(names) => names[s.index()].clone(),
            None => s.to_string(),
        }
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states).map(StateId::from_index)
    }

    /// Raw row-major transition table.
    pub fn table(&self) -> &[u32] {
        &self.delta
    }

    #[inline]
    pub fn step(&self, s: StateId, l: LabelId) -> StateId {
        StateId(self.delta[s.index() * self.labels.len() + l.index()])
    }

    /// Successors of `s`, indexed by label.
    pub fn row(&self, s: StateId) -> &[u32] {
        let w = self.labels.len();
        &self.delta[s.index() * w..(s.index() + 1) * w]
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

    pub fn check_label(&self, l: LabelId) -> Result<()> {
        if l.index() < self.labels.len() {
            Ok(())
        } else {
            Err(Error::InvalidLabel {
                label: l.index(),
                num_labels: self.labels.len(),
            })
        }
    }

    /// Left fold of the transition function over `seq`, starting at `s`.
    pub fn apply_sequence(&self, s: StateId, seq: &[LabelId]) -> Result<StateId> {
        self.check_state(s)?;
        for &l in seq {
            self.check_label(l)?;
        }
        Ok(seq.iter().fold(s, |cur, &l| self.step(cur, l)))
    }

    /// States not reachable from the start state, in index order. Empty when
    /// there is no start state.
    pub fn unreachable_from_start(&self) -> Vec<StateId> {
        let Some(start) = self.start else {
            return Vec::new();
        };
        let seen = self.forward_closure(start);
        self.states().filter(|s| !seen[s.index()]).collect()
    }

    pub(crate) fn forward_closure(&self, from: StateId) -> Vec<bool> {
        let mut seen = vec![false; self.num_states];
        let mut queue = VecDeque::new();
        seen[from.index()] = true;
        queue.push_back(from);
        while let Some(s) = queue.pop_front() {
            for &t in self.row(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(StateId(t));
                }
            }
        }
        seen
    }

    /// True when a start state exists and reaches every state.
    pub fn start_reaches_all(&self) -> bool {
        self.start.is_some() && self.unreachable_from_start().is_empty()
    }

    /// Restricts the automaton to the states reachable from its start state.
    ///
    /// Returns the restricted automaton and, for each old state, its new id
    /// (`None` when stripped). Surviving states keep their relative order.
    pub fn restrict_to_reachable(&self) -> Result<(Semiautomaton, Vec<Option<StateId>>)> {
        let start = self
            .start
            .ok_or_else(|| Error::precondition("automaton has no start state"))?;
        let seen = self.forward_closure(start);
        let mut map = vec![None; self.num_states];
        let mut kept = Vec::new();
        for s in self.states() {
            if seen[s.index()] {
                map[s.index()] = Some(StateId::from_index(kept.len()));
                kept.push(s);
            }
        }
        let w = self.num_labels();
        let mut delta = Vec::with_capacity(kept.len() * w);
        for &s in &kept {
            for &t in self.row(s) {
                delta.push(map[t as usize].expect("closed under transitions").0);
            }
        }
        let mut out = Semiautomaton::from_table(
            kept.len(),
            self.labels.clone(),
            delta,
            map[start.index()].map(StateId::index),
        )?;
        if let Some(names) = &self.state_names {
            out.state_names = Some(kept.iter().map(|s| names[s.index()].clone()).collect());
        }
        Ok((out, map))
    }
}

pub(crate) fn label_names<I, S>(names: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1a() -> Semiautomaton {
        Semiautomaton::new(
            2,
            label_names(["a", "b", "c"]),
            vec![vec![1, 0, 0], vec![1, 1, 1]],
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn apply_sequence_folds_left() {
        let a = fig1a();
        let seq = [LabelId(1), LabelId(0)];
        assert_eq!(a.apply_sequence(StateId(0), &seq).unwrap(), StateId(1));
        assert_eq!(a.apply_sequence(StateId(0), &[]).unwrap(), StateId(0));
    }

    #[test]
    fn apply_sequence_rejects_bad_label() {
        let a = fig1a();
        assert!(matches!(
            a.apply_sequence(StateId(0), &[LabelId(7)]),
            Err(Error::InvalidLabel { label: 7, .. })
        ));
    }

    #[test]
    fn non_total_table_is_rejected() {
        let err = Semiautomaton::new(2, label_names(["a", "b"]), vec![vec![0, 1], vec![0]], None)
            .unwrap_err();
        assert!(err.to_string().contains("delta[1]"));
        let err = Semiautomaton::new(1, label_names(["a"]), vec![vec![3]], None).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn empty_state_space_is_rejected() {
        assert!(Semiautomaton::new(0, vec![], vec![], None).is_err());
    }

    #[test]
    fn restrict_drops_unreachable() {
        let a = Semiautomaton::new(
            3,
            label_names(["a"]),
            vec![vec![1], vec![1], vec![0]],
            Some(0),
        )
        .unwrap();
        assert_eq!(a.unreachable_from_start(), vec![StateId(2)]);
        let (r, map) = a.restrict_to_reachable().unwrap();
        assert_eq!(r.num_states(), 2);
        assert_eq!(map, vec![Some(StateId(0)), Some(StateId(1)), None]);
    }
}
