//! Free-termination analysis for finite semiautomata.
//!
//! A semiautomaton is a total transition system `(D, L, U)`; a query maps
//! each state to a result value. A state is a *free termination state* when
//! every state reachable from it has the same query value, so a computation
//! sitting there can stop and report its answer.

pub mod algebra;
pub mod automaton;
pub mod distsim;
pub mod dot;
pub mod error;
pub mod format;
pub mod ft;
pub mod graph;
pub mod minimize;
pub mod models;
pub mod order;
pub mod query;
pub mod relational;

pub use automaton::{LabelId, Semiautomaton, StateId};
pub use error::{Error, Result};
pub use ft::{all_ft_states, ft_oracle, is_ft_state, FtStatus, FtVerdict};
pub use graph::{build_graph, TransitionGraph};
pub use order::{Antichain, PartialOrder};
pub use query::{Query, Value, ValueOrder};
