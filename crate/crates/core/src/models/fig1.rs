//! The four three-letter DFAs illustrating the free-termination categories.

use serde::{Deserialize, Serialize};

use super::Model;
use crate::automaton::{label_names, Semiautomaton};
use crate::query::Query;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fig1Variant {
    A,
    B,
    C,
    D,
}

impl std::str::FromStr for Fig1Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" => Ok(Fig1Variant::A),
            "b" => Ok(Fig1Variant::B),
            "c" => Ok(Fig1Variant::C),
            "d" => Ok(Fig1Variant::D),
            other => Err(format!("unknown variant {other:?}, expected a, b, c or d")),
        }
    }
}

fn dfa(names: &[&str], rows: Vec<Vec<usize>>, accepting: &[usize], what: &str) -> Model {
    let n = names.len();
    let automaton = Semiautomaton::new(n, label_names(["a", "b", "c"]), rows, Some(0))
        .and_then(|a| a.with_state_names(names.iter().map(|s| s.to_string()).collect()))
        .expect("fixed encoding is valid");
    let bits: Vec<bool> = (0..n).map(|s| accepting.contains(&s)).collect();
    Model {
        automaton,
        query: Query::from_bools(&bits),
        provenance: format!("DFA over {{a,b,c}}: {what}"),
    }
}

/// The DFA for one variant; the query is true on accepting states. Labels
/// are `a, b, c` in that order and state 0 is the start.
pub fn fig1(variant: Fig1Variant) -> Model {
    match variant {
        Fig1Variant::A => dfa(
            &["start", "s2"],
            vec![vec![1, 0, 0], vec![1, 1, 1]],
            &[1],
            "contains an a",
        ),
        Fig1Variant::B => dfa(
            &["start", "s2", "l1", "l2", "r1", "r2"],
            vec![
                vec![2, 4, 0], // start
                vec![3, 5, 1], // s2
                vec![3, 1, 2], // l1
                vec![3, 3, 3], // l2
                vec![1, 5, 4], // r1
                vec![5, 5, 5], // r2
            ],
            &[3],
            "two a's occur, and before the second b if there are two b's",
        ),
        Fig1Variant::C => dfa(
            &["start", "s2"],
            vec![vec![0, 1, 0], vec![1, 0, 1]],
            &[1],
            "contains an odd number of b's",
        ),
        Fig1Variant::D => dfa(
            &["start", "l1", "l2", "r1", "r2", "r3"],
            vec![
                vec![4, 1, 3], // start
                vec![1, 2, 1], // l1
                vec![2, 1, 2], // l2
                vec![4, 3, 3], // r1
                vec![5, 4, 4], // r2
                vec![5, 5, 5], // r3
            ],
            &[1, 5],
            "starts with b and has an odd number of b's, or does not start with b and contains two a's",
        ),
    }
}
