//! Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::automaton::Semiautomaton;
use crate::query::{Query, Value};

/// Rendering options for [`to_dot`].
#[derive(Clone, Debug, Default)]
pub struct DotOptions {
    /// States with this value get a double border. Defaults to `T` for
    /// Boolean queries.
    pub accept: Option<Value>,
    /// States to fill, typically the free termination states.
    pub highlight: Option<Vec<bool>>,
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One node per state labelled with its name and query value; one edge per
/// source/target pair with the labels of all parallel transitions joined by
/// commas.
pub fn to_dot(a: &Semiautomaton, q: &Query, opts: &DotOptions) -> String {
    let accept = opts
        .accept
        .clone()
        .or_else(|| q.is_boolean().then_some(Value::Bool(true)));
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
    if let Some(s) = a.start() {
        out.push_str("  __start [shape=point];\n");
        let _ = writeln!(out, "  __start -> {};", s.0);
    }
    for s in a.states() {
        let v = q.value(s);
        let mut attrs = vec![format!(
            "label=\"{}\\n{}\"",
            escape(&a.state_name(s)),
            escape(&v.to_string())
        )];
        if accept.as_ref() == Some(v) {
            attrs.push("shape=doublecircle".into());
        }
        if opts.highlight.as_ref().is_some_and(|h| h[s.index()]) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=palegreen".into());
        }
        let _ = writeln!(out, "  {} [{}];", s.0, attrs.join(", "));
    }
    for s in a.states() {
        let mut merged: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for (l, &t) in a.row(s).iter().enumerate() {
            merged.entry(t).or_default().push(&a.labels()[l]);
        }
        for (t, labels) in merged {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\"];",
                s.0,
                t,
                escape(&labels.join(","))
            );
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::label_names;

    #[test]
    fn parallel_edges_merge() {
        let a = Semiautomaton::new(
            2,
            label_names(["a", "b", "c"]),
            vec![vec![1, 0, 0], vec![1, 1, 1]],
            Some(0),
        )
        .unwrap();
        let q = Query::from_bools(&[false, true]);
        let dot = to_dot(
            &a,
            &q,
            &DotOptions {
                highlight: Some(vec![false, true]),
                ..Default::default()
            },
        );
        assert!(dot.contains("0 -> 0 [label=\"b,c\"];"));
        assert!(dot.contains("1 -> 1 [label=\"a,b,c\"];"));
        assert!(dot.contains(
            "1 [label=\"s1\\nT\", shape=doublecircle, style=filled, fillcolor=palegreen];"
        ));
        assert!(!dot.contains("0 [label=\"s0\\nF\", shape"));
    }
}
