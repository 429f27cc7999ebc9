//! Counter CRDTs truncated at a cap, cyclic counters, and a string builder
//! whose query commutes while its update does not.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_size, Model};
use crate::automaton::{label_names, Semiautomaton};
use crate::error::{Error, Result};
use crate::query::{Query, Value};

/// What a counter model reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterQuery {
    /// The counter value.
    #[default]
    Sum,
    /// Whether the counter value is at least the bound.
    SumAtLeast(i64),
}

impl FromStr for CounterQuery {
    type Err = String;

    /// `sum` or `sum>=K`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sum" => Ok(CounterQuery::Sum),
            other => other
                .strip_prefix("sum>=")
                .and_then(|k| k.trim().parse().ok())
                .map(CounterQuery::SumAtLeast)
                .ok_or_else(|| format!("expected `sum` or `sum>=K`, got {other:?}")),
        }
    }
}

impl fmt::Display for CounterQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CounterQuery::Sum => f.write_str("sum"),
            CounterQuery::SumAtLeast(k) => write!(f, "sum>={k}"),
        }
    }
}

impl CounterQuery {
    fn value(self, sum: i64) -> Value {
        match self {
            CounterQuery::Sum => Value::Int(sum),
            CounterQuery::SumAtLeast(k) => Value::Bool(sum >= k),
        }
    }
}

/// Mixed-radix vectors in `{0..=cap}^len`, index `Σ v[j]·(cap+1)^j`.
struct Radix {
    base: usize,
    len: usize,
}

impl Radix {
    fn count(&self) -> usize {
        self.base.pow(self.len as u32)
    }

    fn digits(&self, mut i: usize) -> Vec<usize> {
        (0..self.len)
            .map(|_| {
                let d = i % self.base;
                i /= self.base;
                d
            })
            .collect()
    }

    fn index(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &d| acc * self.base + d)
    }

    fn name(&self, i: usize) -> String {
        let parts: Vec<String> = self.digits(i).iter().map(|d| d.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

fn radix_states(what: &str, cap: u32, len: usize) -> Result<u128> {
    let base = cap as u128 + 1;
    let mut states: u128 = 1;
    for _ in 0..len {
        states = states.saturating_mul(base);
        if states > super::MAX_GENERATED_STATES {
            return Err(Error::cap(
                format!("{what} states"),
                states,
                super::MAX_GENERATED_STATES,
            ));
        }
    }
    Ok(states)
}

/// Grow-only counter with one slot per replica, each saturating at `cap`.
/// `inc(j)` bumps slot `j`; `merge(v)` takes the element-wise maximum with
/// replica state `v`.
pub fn g_counter(replicas: usize, cap: u32, with_merge: bool, kind: CounterQuery) -> Result<Model> {
    let states = radix_states("g-counter", cap, replicas)?;
    let merges = if with_merge { states } else { 0 };
    check_size("g-counter", states, replicas as u128 + merges)?;
    let r = Radix {
        base: cap as usize + 1,
        len: replicas,
    };
    let n = r.count();
    let mut labels: Vec<String> = (0..replicas).map(|j| format!("inc({j})")).collect();
    if with_merge {
        labels.extend((0..n).map(|v| format!("merge{}", r.name(v))));
    }
    let automaton = Semiautomaton::from_fn(n, labels, Some(0), |s, l| {
        let mut d = r.digits(s);
        if l < replicas {
            d[l] = (d[l] + 1).min(cap as usize);
        } else {
            for (x, y) in d.iter_mut().zip(r.digits(l - replicas)) {
                *x = (*x).max(y);
            }
        }
        r.index(&d)
    })?
    .with_state_names((0..n).map(|s| r.name(s)).collect())?;
    let query = Query::from_fn(n, |s| kind.value(r.digits(s).iter().sum::<usize>() as i64));
    Ok(Model {
        automaton,
        query,
        provenance: format!("grow-only counter, {replicas} replicas, cap {cap}, query {kind}"),
    })
}

/// Positive-negative counter: a pair of grow-only vectors. State index is
/// `pos + (cap+1)^replicas · neg`; the value is `Σpos − Σneg`.
pub fn pn_counter(replicas: usize, cap: u32, kind: CounterQuery) -> Result<Model> {
    let states = radix_states("pn-counter", cap, 2 * replicas)?;
    check_size("pn-counter", states, 2 * replicas as u128)?;
    let half = Radix {
        base: cap as usize + 1,
        len: replicas,
    };
    let h = half.count();
    let n = h * h;
    let mut labels: Vec<String> = (0..replicas).map(|j| format!("inc({j})")).collect();
    labels.extend((0..replicas).map(|j| format!("dec({j})")));
    let automaton = Semiautomaton::from_fn(n, labels, Some(0), |s, l| {
        let (mut pos, mut neg) = (half.digits(s % h), half.digits(s / h));
        let (v, j) = if l < replicas {
            (&mut pos, l)
        } else {
            (&mut neg, l - replicas)
        };
        v[j] = (v[j] + 1).min(cap as usize);
        half.index(&pos) + h * half.index(&neg)
    })?
    .with_state_names(
        (0..n)
            .map(|s| format!("P{} N{}", half.name(s % h), half.name(s / h)))
            .collect(),
    )?;
    let query = Query::from_fn(n, |s| {
        let p: usize = half.digits(s % h).iter().sum();
        let m: usize = half.digits(s / h).iter().sum();
        kind.value(p as i64 - m as i64)
    });
    Ok(Model {
        automaton,
        query,
        provenance: format!(
            "positive-negative counter, {replicas} replicas, cap {cap}, query {kind}"
        ),
    })
}

/// `Z_n` with a single increment label; the query is "state is 0".
pub fn modular_counter(n: usize) -> Result<Model> {
    if n == 0 {
        return Err(Error::malformed("modulus must be positive"));
    }
    check_size("modular counter", n as u128, 1)?;
    let automaton = Semiautomaton::from_fn(n, label_names(["inc"]), Some(0), |s, _| (s + 1) % n)?;
    Ok(Model {
        automaton,
        query: Query::from_fn(n, |s| (s == 0).into()),
        provenance: format!("counter modulo {n}"),
    })
}

/// The group `Z_n` with its addition table as the update: label `+k` adds
/// `k`. The query is "state is 0".
pub fn modular_addition(n: usize) -> Result<Model> {
    if n == 0 {
        return Err(Error::malformed("modulus must be positive"));
    }
    check_size("modular addition", n as u128, n as u128)?;
    let labels = (0..n).map(|k| format!("+{k}")).collect();
    let automaton = Semiautomaton::from_fn(n, labels, Some(0), |s, k| (s + k) % n)?;
    Ok(Model {
        automaton,
        query: Query::from_fn(n, |s| (s == 0).into()),
        provenance: format!("addition modulo {n}"),
    })
}

/// Largest length cap for [`string_count`].
pub const STRING_CAP: usize = 16;

/// Strings over `{a, b}` built by appending, with query "number of a's".
///
/// Strings up to length `cap` are kept exactly. Appending to a full string
/// moves to an overflow state that remembers only the count of a's,
/// saturating at `cap + 1`. Appending does not commute, but the count does.
pub fn string_count(cap: usize) -> Result<Model> {
    if cap > STRING_CAP {
        return Err(Error::cap("string length", cap as u128, STRING_CAP as u128));
    }
    // strings of length k start at index 2^k - 1, letter a = bit 0
    let strings = (1usize << (cap + 1)) - 1;
    let overflow = cap + 2;
    let n = strings + overflow;
    let len_of = |i: usize| (usize::BITS - 1 - (i + 1).leading_zeros()) as usize;
    let bits_of = |i: usize| i + 1 - (1 << len_of(i));
    let count_a = |i: usize| {
        if i >= strings {
            i - strings
        } else {
            len_of(i) - bits_of(i).count_ones() as usize
        }
    };
    let automaton = Semiautomaton::from_fn(n, label_names(["a", "b"]), Some(0), |s, l| {
        let add = usize::from(l == 0);
        if s >= strings || len_of(s) == cap {
            strings + (count_a(s) + add).min(cap + 1)
        } else {
            let k = len_of(s);
            (1 << (k + 1)) - 1 + (bits_of(s) | l << k)
        }
    })?
    .with_state_names(
        (0..n)
            .map(|s| {
                if s >= strings {
                    format!("overflow#{}", s - strings)
                } else {
                    let (k, b) = (len_of(s), bits_of(s));
                    let w: String = (0..k)
                        .map(|i| if b >> i & 1 == 0 { 'a' } else { 'b' })
                        .collect();
                    format!("\"{w}\"")
                }
            })
            .collect(),
    )?;
    Ok(Model {
        automaton,
        query: Query::from_fn(n, |s| Value::Int(count_a(s) as i64)),
        provenance: format!(
            "append-only strings over {{a,b}} up to length {cap}, query counts a's"
        ),
    })
}
