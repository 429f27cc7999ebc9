//! Naive evaluation of transitive closure as a chain semiautomaton.
//!
//! ```text
//! P(x,y) <- Edge(x,y)
//! P(x,y) <- P(x,z), Edge(z,y)
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Model;
use crate::automaton::{label_names, Semiautomaton};
use crate::error::{Error, Result};
use crate::query::Query;

/// Most distinct vertices accepted.
pub const TC_MAX_VERTICES: usize = 8;

/// Boolean query over the derived path relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TcQuery {
    /// `Q() <- P(s,t)`.
    Path(u32, u32),
    /// `Q() <- P(x,x)`.
    Cycle,
}

type Paths = BTreeSet<(u32, u32)>;

fn round(paths: &Paths, edges: &Paths) -> Paths {
    let mut next = edges.clone();
    for &(x, z) in paths {
        for &(z2, y) in edges.range((z, 0)..=(z, u32::MAX)) {
            debug_assert_eq!(z, z2);
            next.insert((x, y));
        }
    }
    next
}

/// One state per distinct round of naive evaluation, starting from the
/// empty path relation. The single label `step` runs one round; the last
/// state is the fixpoint and loops to itself.
pub fn tc_fixpoint(edges: &[(u32, u32)], query: TcQuery) -> Result<Model> {
    let edge_set: Paths = edges.iter().copied().collect();
    let vertices: BTreeSet<u32> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    if vertices.len() > TC_MAX_VERTICES {
        return Err(Error::cap(
            "graph vertices",
            vertices.len() as u128,
            TC_MAX_VERTICES as u128,
        ));
    }
    let mut chain: Vec<Paths> = vec![Paths::new()];
    loop {
        let next = round(chain.last().expect("nonempty"), &edge_set);
        if next == *chain.last().expect("nonempty") {
            break;
        }
        chain.push(next);
    }
    let n = chain.len();
    let automaton =
        Semiautomaton::from_fn(n, label_names(["step"]), Some(0), |s, _| (s + 1).min(n - 1))?
            .with_state_names(
                chain
                    .iter()
                    .map(|p| {
                        let facts: Vec<String> =
                            p.iter().map(|(x, y)| format!("P({x},{y})")).collect();
                        format!("{{{}}}", facts.join(","))
                    })
                    .collect(),
            )?;
    let holds = |p: &Paths| match query {
        TcQuery::Path(s, t) => p.contains(&(s, t)),
        TcQuery::Cycle => p.iter().any(|(x, y)| x == y),
    };
    let bits: Vec<bool> = chain.iter().map(holds).collect();
    Ok(Model {
        automaton,
        query: Query::from_bools(&bits),
        provenance: "naive transitive-closure evaluation, one state per round".to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_chain() {
        let m = tc_fixpoint(&[(1, 2), (2, 3)], TcQuery::Path(1, 3)).unwrap();
        assert_eq!(m.automaton.num_states(), 3);
        assert_eq!(m.query.values(), &[false.into(), false.into(), true.into()]);
        assert_eq!(m.automaton.state_name(crate::StateId(1)), "{P(1,2),P(2,3)}");
    }

    #[test]
    fn edgeless_graph_is_single_state() {
        let m = tc_fixpoint(&[], TcQuery::Path(1, 2)).unwrap();
        assert_eq!(m.automaton.num_states(), 1);
    }

    #[test]
    fn too_many_vertices() {
        let edges: Vec<(u32, u32)> = (0..9).map(|i| (i, i + 1)).collect();
        assert!(tc_fixpoint(&edges, TcQuery::Cycle).is_err());
    }
}
