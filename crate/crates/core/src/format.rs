//! JSON file format for an automaton together with its query.
//!
//! ```json
//! {
//!   "states": 2,
//!   "labels": ["a","b","c"],
//!   "start": 0,
//!   "delta": [
//!     [1,0,0],
//!     [1,1,1]
//!   ],
//!   "query": {"values":[false,true],"order":null}
//! }
//! ```
//!
//! `delta[s][l]` is the successor of `s` under label `l`. The optional keys
//! `state_names` and `provenance` carry display names and a free-text note.
//! [`to_json`] always writes keys in this order with one table row per line,
//! so saving a loaded file reproduces it byte for byte.

use serde::{Deserialize, Serialize};

use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};
use crate::query::{Query, Value, ValueOrder};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuery {
    values: Vec<Value>,
    #[serde(default)]
    order: Option<Vec<(Value, Value)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    states: usize,
    labels: Vec<String>,
    #[serde(default)]
    start: Option<usize>,
    delta: Vec<Vec<usize>>,
    query: RawQuery,
    #[serde(default)]
    state_names: Option<Vec<String>>,
    #[serde(default)]
    provenance: Option<String>,
}

/// Contents of an automaton file.
#[derive(Clone, Debug)]
pub struct AutomatonFile {
    pub automaton: Semiautomaton,
    pub query: Query,
    pub provenance: Option<String>,
}

impl AutomatonFile {
    pub fn new(automaton: Semiautomaton, query: Query) -> Self {
        AutomatonFile {
            automaton,
            query,
            provenance: None,
        }
    }
}

/// Parses and validates a file. Syntax errors carry line and column.
pub fn from_json(text: &str) -> Result<AutomatonFile> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::malformed(e.to_string()))?;
    if raw.states != raw.delta.len() {
        return Err(Error::malformed(format!(
            "\"states\" is {} but \"delta\" has {} rows",
            raw.states,
            raw.delta.len()
        )));
    }
    let mut automaton = Semiautomaton::new(raw.states, raw.labels, raw.delta, raw.start)?;
    if let Some(names) = raw.state_names {
        automaton = automaton.with_state_names(names)?;
    }
    if raw.query.values.len() != raw.states {
        return Err(Error::malformed(format!(
            "query.values has {} entries for {} states",
            raw.query.values.len(),
            raw.states
        )));
    }
    let mut query = Query::new(raw.query.values);
    if let Some(pairs) = raw.query.order {
        let order = ValueOrder::explicit(pairs, query.distinct_values().to_vec())?;
        query = query.with_order(order)?;
    }
    if automaton.start().is_some() && !automaton.start_reaches_all() {
        log::warn!(
            "{} states are unreachable from the start state",
            automaton.unreachable_from_start().len()
        );
    }
    Ok(AutomatonFile {
        automaton,
        query,
        provenance: raw.provenance,
    })
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Canonical serialization, newline terminated.
pub fn to_json(file: &AutomatonFile) -> String {
    let a = &file.automaton;
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"states\": {},\n", a.num_states()));
    out.push_str(&format!("  \"labels\": {},\n", json(a.labels())));
    out.push_str(&format!(
        "  \"start\": {},\n",
        json(&a.start().map(|s| s.0))
    ));
    out.push_str("  \"delta\": [\n");
    for s in a.states() {
        let sep = if s.index() + 1 < a.num_states() {
            ","
        } else {
            ""
        };
        out.push_str(&format!("    {}{sep}\n", json(a.row(s))));
    }
    out.push_str("  ],\n");
    let query = RawQuery {
        values: file.query.values().to_vec(),
        order: file
            .query
            .order()
            .and_then(|o| o.pairs())
            .map(<[_]>::to_vec),
    };
    out.push_str(&format!("  \"query\": {}", json(&query)));
    if let Some(names) = a.state_names() {
        out.push_str(&format!(",\n  \"state_names\": {}", json(names)));
    }
    if let Some(p) = &file.provenance {
        out.push_str(&format!(",\n  \"provenance\": {}", json(p)));
    }
    out.push_str("\n}\n");
    out
}
