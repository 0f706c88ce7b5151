use thiserror::Error;

use crate::nba::StateId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("state {0} is not present")]
    StateNotPresent(StateId),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("invalid slice: {0}")]
    InvalidSlice(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid lasso: {0}")]
    InvalidLasso(String),
    #[error("macrostate cap of {cap} exceeded")]
    CapacityExceeded { cap: usize },
    #[error("no edge from state {state} on `{symbol}`")]
    MissingEdge { state: usize, symbol: String },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }
}
