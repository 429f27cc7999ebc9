//! Generators for concrete systems: the small DFAs, set-union systems,
//! bounded state-based CRDTs, counters, a transitive-closure fixpoint chain
//! and random automata for testing.

mod counters;
mod fig1;
mod fixpoint;
mod random;
mod sets;

use serde::{Deserialize, Serialize};

pub use counters::{
    g_counter, modular_addition, modular_counter, pn_counter, string_count, CounterQuery,
};
pub use fig1::{fig1, Fig1Variant};
pub use fixpoint::{tc_fixpoint, TcQuery};
pub use random::{random_acyclic, random_automaton, random_query, random_strongly_connected};
pub use sets::{grow_only_set, powerset_union, two_phase_set};

use crate::automaton::Semiautomaton;
use crate::error::{Error, Result};
use crate::query::Query;
use crate::relational::{Expr, Fact};

/// Largest state count any generator produces.
pub const MAX_GENERATED_STATES: u128 = 1_000_000;
/// Largest transition table any generator allocates.
pub const MAX_TABLE_ENTRIES: u128 = 1 << 25;

/// A generated system with a note on what it encodes.
#[derive(Clone, Debug)]
pub struct Model {
    pub automaton: Semiautomaton,
    pub query: Query,
    pub provenance: String,
}

/// Rejects a generator request before allocating anything.
pub(crate) fn check_size(what: &str, states: u128, labels: u128) -> Result<()> {
    if states > MAX_GENERATED_STATES {
        return Err(Error::cap(
            format!("{what} states"),
            states,
            MAX_GENERATED_STATES,
        ));
    }
    let entries = states.saturating_mul(labels);
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::cap(
            format!("{what} transitions"),
            entries,
            MAX_TABLE_ENTRIES,
        ));
    }
    Ok(())
}

/// Parameters for one generator, as stored in files and on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Fig1 {
        variant: Fig1Variant,
    },
    PowersetUnion {
        universe: Vec<String>,
        query: String,
    },
    GrowOnlySet {
        universe: Vec<String>,
        #[serde(default)]
        with_merge: bool,
        #[serde(default)]
        query: Option<String>,
    },
    TwoPhaseSet {
        universe: Vec<String>,
        #[serde(default)]
        query: Option<String>,
    },
    GCounter {
        replicas: usize,
        cap: u32,
        #[serde(default = "yes")]
        with_merge: bool,
        #[serde(default)]
        query: CounterQuery,
    },
    PnCounter {
        replicas: usize,
        cap: u32,
        #[serde(default)]
        query: CounterQuery,
    },
    TcFixpoint {
        edges: Vec<(u32, u32)>,
        query: TcQuery,
    },
    ModularCounter {
        n: usize,
    },
    ModularAddition {
        n: usize,
    },
    StringCount {
        cap: usize,
    },
    RandomAcyclic {
        states: usize,
        labels: usize,
        values: usize,
        seed: u64,
    },
    RandomStronglyConnected {
        states: usize,
        labels: usize,
        values: usize,
        seed: u64,
    },
}

fn yes() -> bool {
    true
}

fn parse_universe(names: &[String]) -> Result<Vec<Fact>> {
    names.iter().map(|n| Fact::parse(n)).collect()
}

fn parse_query(q: &Option<String>) -> Result<Option<Expr>> {
    q.as_deref().map(Expr::parse).transpose()
}

/// Builds the system described by `spec`.
pub fn generate(spec: &ModelSpec) -> Result<Model> {
    match spec {
        ModelSpec::Fig1 { variant } => Ok(fig1(*variant)),
        ModelSpec::PowersetUnion { universe, query } => {
            powerset_union(&parse_universe(universe)?, &Expr::parse(query)?)
        }
        ModelSpec::GrowOnlySet {
            universe,
            with_merge,
            query,
        } => grow_only_set(
            &parse_universe(universe)?,
            *with_merge,
            parse_query(query)?.as_ref(),
        ),
        ModelSpec::TwoPhaseSet { universe, query } => {
            two_phase_set(&parse_universe(universe)?, parse_query(query)?.as_ref())
        }
        ModelSpec::GCounter {
            replicas,
            cap,
            with_merge,
            query,
        } => g_counter(*replicas, *cap, *with_merge, *query),
        ModelSpec::PnCounter {
            replicas,
            cap,
            query,
        } => pn_counter(*replicas, *cap, *query),
        ModelSpec::TcFixpoint { edges, query } => tc_fixpoint(edges, *query),
        ModelSpec::ModularCounter { n } => modular_counter(*n),
        ModelSpec::ModularAddition { n } => modular_addition(*n),
        ModelSpec::StringCount { cap } => string_count(*cap),
        ModelSpec::RandomAcyclic {
            states,
            labels,
            values,
            seed,
        } => {
            let automaton = random_acyclic(*states, *labels, *seed)?;
            let query = random_query(*states, *values, seed.wrapping_add(1));
            Ok(Model {
                automaton,
                query,
                provenance: format!("random acyclic automaton, seed {seed}"),
            })
        }
        ModelSpec::RandomStronglyConnected {
            states,
            labels,
            values,
            seed,
        } => {
            let automaton = random_strongly_connected(*states, *labels, *seed)?;
            let query = random_query(*states, *values, seed.wrapping_add(1));
            Ok(Model {
                automaton,
                query,
                provenance: format!("random strongly connected automaton, seed {seed}"),
            })
        }
    }
}
