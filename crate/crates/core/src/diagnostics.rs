//! Runtime checks of the transition pipeline and of rank-profile
//! monotonicity along runs of the input automaton.

use std::cmp::Ordering;

use crate::determinize::TransitionTrace;
use crate::error::{Error, Result};
use crate::nba::{BuchiAutomaton, StateId, StateSet};
use crate::oracle::Witness;
use crate::parity::ParityAutomaton;
use crate::slice::{Rank, RankTree, RankedSlice};

/// Violated pipeline invariants of a single transition; empty when sound.
pub fn check_transition(
    aut: &BuchiAutomaton,
    source: &RankedSlice,
    sym: usize,
    trace: &TransitionTrace,
) -> Vec<String> {
    let mut out = Vec::new();
    let out_ = &trace.outcome;
    let expected: StateSet = aut.post_set(source.sets().iter().flatten(), sym);

    for (stage, got) in [
        ("step", trace.stepped.states()),
        ("prune", trace.pruned.states()),
        ("merge", trace.merged.states()),
        ("normalize", out_.successor.states()),
    ] {
        if got != expected {
            out.push(format!("{stage} does not conserve the successor union"));
        }
    }
    for (stage, disjoint) in [
        ("step", trace.stepped.is_disjoint()),
        ("prune", trace.pruned.is_disjoint()),
        ("merge", trace.merged.is_disjoint()),
    ] {
        if !disjoint {
            out.push(format!("{stage} produced overlapping sets"));
        }
    }
    if !source.is_sink() {
        let k = out_.dominating;
        let even = out_.priority.is_multiple_of(2);
        if even != out_.green.contains(&k) {
            out.push(format!(
                "priority {} disagrees with dominating rank {k}",
                out_.priority
            ));
        }
        if out_.priority != 2 * k && out_.priority + 1 != 2 * k {
            out.push(format!(
                "priority {} is not induced by rank {k}",
                out_.priority
            ));
        }
        if !trace.partition.is_valid_for(&trace.pruned.ranks, k) {
            out.push(format!(
                "partition {} violates the merge constraints",
                trace.partition
            ));
        }
    } else if out_.priority != 1 || !out_.successor.is_sink() {
        out.push("sink must loop with priority 1".into());
    }
    out
}

/// Dominating rank recovered from an edge priority.
pub fn rank_of_priority(priority: u32) -> Rank {
    priority.div_ceil(2)
}

/// A step where the run's state moved to a worse position than allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileViolation {
    pub position: usize,
    pub state: StateId,
    pub before: String,
    pub after: String,
    pub k: Rank,
}

/// Embeds the witness run into the labelled macrostate sequence and checks
/// that at every step the `k`-cut of the run state's rank profile does not
/// get worse, `k` being the step's dominating rank.
///
/// The check covers the prefix plus enough cycle passes for both the run
/// and the deterministic run to repeat.
pub fn profile_monotonicity(
    dpa: &ParityAutomaton,
    stem: &[usize],
    cycle: &[usize],
    witness: &Witness,
) -> Result<Vec<ProfileViolation>> {
    let sym = |i: usize| {
        if i < stem.len() {
            stem[i]
        } else {
            cycle[(i - stem.len()) % cycle.len()]
        }
    };
    let steps = witness.prefix.len().max(stem.len()) + witness.cycle.len() * (dpa.num_states() + 1);
    let slice_of = |s: usize| -> Result<RankedSlice> {
        dpa.label(s)
            .ok_or_else(|| Error::Invariant(format!("state {s} carries no label")))?
            .parse()
    };
    let mut violations = Vec::new();
    let mut state = dpa.initial();
    let mut current = slice_of(state)?;
    for i in 0..steps {
        let edge = dpa.edge(state, sym(i)).ok_or_else(|| Error::MissingEdge {
            state,
            symbol: dpa.alphabet()[sym(i)].clone(),
        })?;
        let next = slice_of(edge.target)?;
        let (q, r) = (witness.state_at(i), witness.state_at(i + 1));
        let before = current.rank_profile(q)?;
        let after = next.rank_profile(r)?;
        let k = rank_of_priority(edge.priority);
        if after.better_cmp_at(&before, k) == Ordering::Greater {
            violations.push(ProfileViolation {
                position: i,
                state: r,
                before: before.to_string(),
                after: after.to_string(),
                k,
            });
        }
        state = edge.target;
        current = next;
    }
    Ok(violations)
}
