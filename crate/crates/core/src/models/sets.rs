//! Set-union systems and set CRDTs over a finite fact universe.
//!
//! A set is a bit mask over the universe, bit `i` standing for `universe[i]`,
//! and the state index is the mask itself.

use super::{check_size, Model};
use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};
use crate::query::{Query, Value};
use crate::relational::{format_set, Expr, Fact};

/// Universe size cap for the plain set-union system.
pub const POWERSET_CAP: usize = 20;
/// Universe size cap for the two-phase set, whose states are pairs of sets.
pub const TWO_PHASE_CAP: usize = 10;

fn check_universe(universe: &[Fact], cap: usize) -> Result<()> {
    if universe.len() > cap {
        return Err(Error::cap(
            "universe size",
            universe.len() as u128,
            cap as u128,
        ));
    }
    for (i, f) in universe.iter().enumerate() {
        if universe[..i].contains(f) {
            return Err(Error::malformed(format!(
                "fact {f} appears twice in the universe"
            )));
        }
    }
    Ok(())
}

fn set_name(universe: &[Fact], mask: usize) -> String {
    format_set(
        universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, f)| f),
    )
}

/// `S_∪` on a finite universe: states are all subsets, label `x` adds `x`,
/// and the start is the empty set.
pub fn powerset_union(universe: &[Fact], query: &Expr) -> Result<Model> {
    check_universe(universe, POWERSET_CAP)?;
    let n = universe.len();
    check_size("powerset", 1u128 << n, n as u128)?;
    let labels = universe.iter().map(|f| f.to_string()).collect();
    let automaton = Semiautomaton::from_fn(1 << n, labels, Some(0), |s, l| s | 1 << l)?
        .with_state_names((0..1usize << n).map(|m| set_name(universe, m)).collect())?;
    let compiled = query.compile(universe)?;
    let bits: Vec<bool> = (0..1u64 << n).map(|m| compiled.eval(m)).collect();
    Ok(Model {
        automaton,
        query: Query::from_bools(&bits),
        provenance: format!("set union over {}", format_set(universe)),
    })
}

/// Grow-only set. Labels insert one element; with `with_merge`, one extra
/// label per possible incoming replica state merges by union. The default
/// query is the set itself, as a membership vector.
pub fn grow_only_set(universe: &[Fact], with_merge: bool, query: Option<&Expr>) -> Result<Model> {
    let cap = if with_merge {
        TWO_PHASE_CAP
    } else {
        POWERSET_CAP
    };
    check_universe(universe, cap)?;
    let n = universe.len();
    let states = 1usize << n;
    let merges = if with_merge { states } else { 0 };
    check_size("grow-only set", states as u128, (n + merges) as u128)?;
    let mut labels: Vec<String> = universe.iter().map(|f| f.to_string()).collect();
    labels.extend((0..merges).map(|m| format!("merge{}", set_name(universe, m))));
    let automaton = Semiautomaton::from_fn(states, labels, Some(0), |s, l| {
        if l < n {
            s | 1 << l
        } else {
            s | (l - n)
        }
    })?
    .with_state_names((0..states).map(|m| set_name(universe, m)).collect())?;
    let query = match query {
        Some(e) => {
            let c = e.compile(universe)?;
            Query::from_fn(states, |m| c.eval(m as u64).into())
        }
        None => Query::from_fn(states, |m| {
            Value::List((0..n).map(|i| Value::Bool(m >> i & 1 == 1)).collect())
        }),
    };
    Ok(Model {
        automaton,
        query,
        provenance: format!(
            "grow-only set CRDT over {}{}",
            format_set(universe),
            if with_merge { " with merge labels" } else { "" }
        ),
    })
}

/// Two-phase set: state `ins | del << n` holds the INSERTS and DELETES sets.
/// The sets may overlap; an element is visible when inserted and not
/// deleted. The default query is the visibility vector; an expression is
/// evaluated on the visible set.
pub fn two_phase_set(universe: &[Fact], query: Option<&Expr>) -> Result<Model> {
    check_universe(universe, TWO_PHASE_CAP)?;
    let n = universe.len();
    let states = 1usize << (2 * n);
    check_size("two-phase set", states as u128, 2 * n as u128)?;
    let mut labels: Vec<String> = universe.iter().map(|f| format!("ins({f})")).collect();
    labels.extend(universe.iter().map(|f| format!("del({f})")));
    let low = (1usize << n) - 1;
    let automaton = Semiautomaton::from_fn(states, labels, Some(0), |s, l| s | 1 << l)?
        .with_state_names(
            (0..states)
                .map(|s| {
                    format!(
                        "I={} D={}",
                        set_name(universe, s & low),
                        set_name(universe, s >> n)
                    )
                })
                .collect(),
        )?;
    let visible = |s: usize| (s & low & !(s >> n)) as u64;
    let query = match query {
        Some(e) => {
            let c = e.compile(universe)?;
            Query::from_fn(states, |s| c.eval(visible(s)).into())
        }
        None => Query::from_fn(states, |s| {
            let v = visible(s);
            Value::List((0..n).map(|i| Value::Bool(v >> i & 1 == 1)).collect())
        }),
    };
    Ok(Model {
        automaton,
        query,
        provenance: format!("two-phase set CRDT over {}", format_set(universe)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn facts(names: &[&str]) -> Vec<Fact> {
        names.iter().map(|n| Fact::parse(n).unwrap()).collect()
    }

    #[test]
    fn powerset_names_and_edges() {
        let m = powerset_union(&facts(&["a", "b", "c"]), &Expr::parse("a").unwrap()).unwrap();
        let a = &m.automaton;
        assert_eq!(a.num_states(), 8);
        assert_eq!(a.state_name(crate::StateId(5)), "{a,c}");
        assert_eq!(a.state_name(crate::StateId(0)), "{}");
        assert_eq!(
            a.apply_sequence(crate::StateId(0), &[crate::LabelId(1), crate::LabelId(1)])
                .unwrap(),
            crate::StateId(2)
        );
    }

    #[test]
    fn empty_universe_is_one_state() {
        let m = powerset_union(&[], &Expr::True).unwrap();
        assert_eq!(m.automaton.num_states(), 1);
        assert_eq!(m.automaton.num_labels(), 0);
    }

    #[test]
    fn duplicate_universe_rejected() {
        assert!(powerset_union(&facts(&["a", "a"]), &Expr::True).is_err());
    }

    #[test]
    fn merge_labels_union() {
        let m = grow_only_set(&facts(&["a", "b"]), true, None).unwrap();
        assert_eq!(m.automaton.num_labels(), 6);
        let merge_b = m.automaton.label_by_name("merge{b}").unwrap();
        assert_eq!(
            m.automaton.step(crate::StateId(1), merge_b),
            crate::StateId(3)
        );
    }

    #[test]
    fn two_phase_visibility() {
        let m = two_phase_set(&facts(&["a"]), None).unwrap();
        let vis: Vec<bool> = m
            .query
            .values()
            .iter()
            .map(|v| *v == Value::List(vec![true.into()]))
            .collect();
        assert_eq!(vis, vec![false, true, false, false]);
    }
}
