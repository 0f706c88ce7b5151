//! Determinization of nondeterministic Büchi automata into transition-based
//! deterministic parity automata.
//!
//! Macrostates are *ranked slices*: ordered tuples of disjoint state sets with
//! a bijective ranking whose rightmost set has rank 1. A transition runs the
//! pipeline `step -> prune -> merge -> normalize`, where the merge stage is
//! pluggable ([`MergeStrategy`]). Ranked slices are in bijection with ranked
//! Safra trees ([`safra`]), and [`oracle`] provides brute-force ground truth
//! for lasso words.

pub mod cli;
pub mod determinize;
pub mod diagnostics;
pub mod error;
pub mod nba;
pub mod oracle;
pub mod parity;
pub mod safra;
pub mod slice;

pub use determinize::{determinize, BaseStrategy, DeterminizeOptions, MergeStrategy};
pub use error::{Error, Result};
pub use nba::{BuchiAutomaton, Lasso, StateId, StateSet};
pub use parity::ParityAutomaton;
pub use safra::RankedSafraTree;
pub use slice::{PreSlice, Rank, RankProfile, RankedSlice};
