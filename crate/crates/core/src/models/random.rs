//! Seeded random automata and queries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::Semiautomaton;
use crate::error::Result;
use crate::query::{Query, Value};

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|l| format!("l{l}")).collect()
}

/// Uniform targets; start state 0.
pub fn random_automaton(n: usize, k: usize, seed: u64) -> Result<Semiautomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Semiautomaton::from_fn(n, labels(k), Some(0), |_, _| rng.gen_range(0..n))
}

/// Every transition goes to the same or a higher index, so the only cycles
/// are self-loops. Self-loops are drawn with probability about one third.
pub fn random_acyclic(n: usize, k: usize, seed: u64) -> Result<Semiautomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Semiautomaton::from_fn(n, labels(k), Some(0), |s, _| {
        if rng.gen_ratio(1, 3) {
            s
        } else {
            rng.gen_range(s..n)
        }
    })
}

/// Label 0 follows a random Hamiltonian cycle, the rest are uniform. Needs
/// at least one label.
pub fn random_strongly_connected(n: usize, k: usize, seed: u64) -> Result<Semiautomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut next = vec![0; n];
    for i in 0..n {
        next[order[i]] = order[(i + 1) % n];
    }
    Semiautomaton::from_fn(n, labels(k.max(1)), Some(0), |s, l| {
        if l == 0 {
            next[s]
        } else {
            rng.gen_range(0..n)
        }
    })
}

/// Integer values drawn from `0..values`; Boolean when `values == 2`.
pub fn random_query(n: usize, values: usize, seed: u64) -> Query {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = values.max(1);
    Query::from_fn(n, |_| {
        let v = rng.gen_range(0..values);
        if values == 2 {
            Value::Bool(v == 1)
        } else {
            Value::Int(v as i64)
        }
    })
}
