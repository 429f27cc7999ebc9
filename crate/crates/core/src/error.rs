use thiserror::Error;

/// Errors produced while building or analysing automata.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid state id {state} (automaton has {num_states} states)")]
    InvalidState { state: usize, num_states: usize },

    #[error("invalid label id {label} (automaton has {num_labels} labels)")]
    InvalidLabel { label: usize, num_labels: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    CapExceeded {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn cap(what: impl Into<String>, needed: u128, cap: u128) -> Self {
        Error::CapExceeded {
            what: what.into(),
            needed,
            cap,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
