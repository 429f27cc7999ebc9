//! Queries: total maps from states to result values, with an optional
//! partial order on the result domain.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::StateId;
use crate::error::{Error, Result};

/// A query result value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Str(String),
    List(Vec<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", if *b { "T" } else { "F" }),
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::List(vs) => {
                write!(f, "[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

/// Partial order on result values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueOrder {
    /// `F ⊑ T` on booleans, `≤` on integers, pointwise on equal-length
    /// lists. Values of different kinds are incomparable.
    Natural,
    /// Reflexive-transitive closure of the listed `(lower, upper)` pairs.
    Explicit(ExplicitOrder),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitOrder {
    pairs: Vec<(Value, Value)>,
    index: BTreeMap<Value, usize>,
    // le[i][j] <=> elems[i] ⊑ elems[j]
    le: Vec<Vec<bool>>,
}

impl ValueOrder {
    /// Builds the closure of `pairs` over the listed values plus `extra`.
    /// Fails when the closure is not antisymmetric.
    pub fn explicit(
        pairs: Vec<(Value, Value)>,
        extra: impl IntoIterator<Item = Value>,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut elems = Vec::new();
        for v in pairs
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .chain(extra)
        {
            if !index.contains_key(&v) {
                index.insert(v.clone(), elems.len());
                elems.push(v);
            }
        }
        let n = index.len();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in &pairs {
            le[index[a]][index[b]] = true;
        }
        // Warshall
        for k in 0..n {
            let via = le[k].clone();
            for row in le.iter_mut() {
                if row[k] {
                    for (cell, &b) in row.iter_mut().zip(&via) {
                        *cell |= b;
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if le[i][j] && le[j][i] {
                    return Err(Error::malformed(format!(
                        "result order is not antisymmetric: {} and {} are mutually below each other",
                        elems[i], elems[j]
                    )));
                }
            }
        }
        Ok(ValueOrder::Explicit(ExplicitOrder { pairs, index, le }))
    }

    /// The pairs this order was declared with (`None` for the natural order).
    pub fn pairs(&self) -> Option<&[(Value, Value)]> {
        match self {
            ValueOrder::Natural => None,
            ValueOrder::Explicit(e) => Some(&e.pairs),
        }
    }

    /// `a ⊑ b`. Errors when an explicit order does not mention a value.
    pub fn le(&self, a: &Value, b: &Value) -> Result<bool> {
        match self {
            ValueOrder::Natural => Ok(natural_le(a, b)),
            ValueOrder::Explicit(e) => {
                let i = e.lookup(a)?;
                let j = e.lookup(b)?;
                Ok(e.le[i][j])
            }
        }
    }

    /// Whether `v` is maximal in the result domain.
    pub fn is_maximal(&self, v: &Value) -> Result<bool> {
        match self {
            ValueOrder::Natural => Ok(natural_extreme(v, true)),
            ValueOrder::Explicit(e) => {
                let i = e.lookup(v)?;
                Ok((0..e.le.len()).all(|j| j == i || !e.le[i][j]))
            }
        }
    }

    /// Whether `v` is minimal in the result domain.
    pub fn is_minimal(&self, v: &Value) -> Result<bool> {
        match self {
            ValueOrder::Natural => Ok(natural_extreme(v, false)),
            ValueOrder::Explicit(e) => {
                let i = e.lookup(v)?;
                Ok((0..e.le.len()).all(|j| j == i || !e.le[j][i]))
            }
        }
    }
}

impl ExplicitOrder {
    fn lookup(&self, v: &Value) -> Result<usize> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::malformed(format!("value {v} is missing from the result order")))
    }
}

fn natural_le(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Bool(x), Value::Bool(y)) => x <= y,
        (Value::Int(x), Value::Int(y)) => x <= y,
        (Value::List(xs), Value::List(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| natural_le(x, y))
        }
        _ => a == b,
    }
}

// Booleans are bounded; integers and strings have no extremes.
fn natural_extreme(v: &Value, top: bool) -> bool {
    match v {
        Value::Bool(b) => *b == top,
        Value::List(vs) => vs.iter().all(|x| natural_extreme(x, top)),
        Value::Int(_) | Value::Str(_) => false,
    }
}

/// A total map `Q: D -> R`, precomputed per state.
///
/// Every distinct value is interned to a dense class id so analyses can
/// compare query results in constant time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    values: Vec<Value>,
    classes: Vec<u32>,
    distinct: Vec<Value>,
    order: Option<ValueOrder>,
}

impl Query {
    pub fn new(values: Vec<Value>) -> Self {
        let mut intern: HashMap<&Value, u32> = HashMap::new();
        let mut distinct = Vec::new();
        let mut classes = Vec::with_capacity(values.len());
        for v in &values {
            let next = intern.len() as u32;
            let c = *intern.entry(v).or_insert_with(|| {
                distinct.push(v.clone());
                next
            });
            classes.push(c);
        }
        Query {
            values,
            classes,
            distinct,
            order: None,
        }
    }

    pub fn from_fn(num_states: usize, f: impl FnMut(usize) -> Value) -> Self {
        Query::new((0..num_states).map(f).collect())
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Query::new(bits.iter().map(|&b| Value::Bool(b)).collect())
    }

    /// A query whose value is the same everywhere.
    pub fn constant(num_states: usize, v: Value) -> Self {
        Query::new(vec![v; num_states])
    }

    pub fn with_order(mut self, order: ValueOrder) -> Result<Self> {
        if let ValueOrder::Explicit(e) = &order {
            for v in &self.distinct {
                e.lookup(v)?;
            }
        }
        self.order = Some(order);
        Ok(self)
    }

    pub fn order(&self) -> Option<&ValueOrder> {
        self.order.as_ref()
    }

    /// The declared order, falling back to [`ValueOrder::Natural`].
    pub fn order_or_natural(&self) -> ValueOrder {
        self.order.clone().unwrap_or(ValueOrder::Natural)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn value(&self, s: StateId) -> &Value {
        &self.values[s.index()]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// Interned class of the value at `s`; equal classes mean equal values.
    #[inline]
    pub fn class(&self, s: StateId) -> u32 {
        self.classes[s.index()]
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn distinct_values(&self) -> &[Value] {
        &self.distinct
    }

    pub fn is_constant(&self) -> bool {
        self.distinct.len() <= 1
    }

    pub fn is_boolean(&self) -> bool {
        self.distinct.iter().all(|v| matches!(v, Value::Bool(_)))
    }

    pub(crate) fn check_len(&self, num_states: usize) -> Result<()> {
        if self.values.len() == num_states {
            Ok(())
        } else {
            Err(Error::malformed(format!(
                "query has {} values for {num_states} states",
                self.values.len()
            )))
        }
    }
}
