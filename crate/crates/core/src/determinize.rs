//! The transition pipeline `step → prune → merge → normalize` on ranked
//! slices and the breadth-first construction of the parity automaton.
//!
//! Left children created by `step` receive pairwise distinct fresh ranks
//! `n+1, n+2, …` (left to right). Fresh ranks never take part in the
//! green/red bookkeeping: only ranks of the source slice can dominate a
//! transition, and a transition without such events gets the dominating
//! rank `|Q|+1`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::nba::{BuchiAutomaton, StateId, StateSet};
use crate::parity::{Edge, ParityAutomaton};
use crate::slice::{left_boundary, PreSlice, Rank, RankTree, RankedSlice};

/// Merge rules that do not depend on previously built macrostates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseStrategy {
    /// Identity merge; macrostates track the reduced split-tree levels.
    MullerSchupp,
    /// Collapse the complete subtree of every green node.
    Safra,
    /// Coarsest permitted partition.
    MaxCollapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeStrategy {
    MullerSchupp,
    Safra,
    MaxCollapse,
    /// Reuse an already constructed successor when one is permitted,
    /// otherwise defer to `fallback`.
    Adaptive {
        fallback: BaseStrategy,
    },
}

impl MergeStrategy {
    pub const ALL: [MergeStrategy; 4] = [
        MergeStrategy::MullerSchupp,
        MergeStrategy::Safra,
        MergeStrategy::MaxCollapse,
        MergeStrategy::Adaptive {
            fallback: BaseStrategy::Safra,
        },
    ];
}

impl From<BaseStrategy> for MergeStrategy {
    fn from(b: BaseStrategy) -> Self {
        match b {
            BaseStrategy::MullerSchupp => MergeStrategy::MullerSchupp,
            BaseStrategy::Safra => MergeStrategy::Safra,
            BaseStrategy::MaxCollapse => MergeStrategy::MaxCollapse,
        }
    }
}

impl fmt::Display for BaseStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseStrategy::MullerSchupp => "ms",
            BaseStrategy::Safra => "safra",
            BaseStrategy::MaxCollapse => "max",
        })
    }
}

impl fmt::Display for MergeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MergeStrategy::MullerSchupp => f.write_str("ms"),
            MergeStrategy::Safra => f.write_str("safra"),
            MergeStrategy::MaxCollapse => f.write_str("max"),
            MergeStrategy::Adaptive {
                fallback: BaseStrategy::Safra,
            } => f.write_str("adaptive"),
            MergeStrategy::Adaptive { fallback } => write!(f, "adaptive:{fallback}"),
        }
    }
}

impl FromStr for BaseStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ms" => Ok(BaseStrategy::MullerSchupp),
            "safra" => Ok(BaseStrategy::Safra),
            "max" => Ok(BaseStrategy::MaxCollapse),
            _ => Err(format!(
                "unknown strategy `{s}` (expected ms, safra, max or adaptive)"
            )),
        }
    }
}

/// Accepts `ms`, `safra`, `max`, `adaptive` and `adaptive:<ms|safra|max>`.
impl FromStr for MergeStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            Some(("adaptive", fb)) => Ok(MergeStrategy::Adaptive {
                fallback: fb.parse()?,
            }),
            None if s == "adaptive" => Ok(MergeStrategy::Adaptive {
                fallback: BaseStrategy::Safra,
            }),
            None => s.parse::<BaseStrategy>().map(Into::into),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

/// Adjacent, contiguous position ranges covering a pre-slice, stored as
/// inclusive `(first, last)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalPartition {
    intervals: Vec<(usize, usize)>,
}

impl IntervalPartition {
    pub fn singletons(len: usize) -> Self {
        IntervalPartition {
            intervals: (0..len).map(|i| (i, i)).collect(),
        }
    }

    /// Partition of `0..len` cut after every position `g` with `cuts[g]`.
    pub fn from_cuts(len: usize, cuts: &[bool]) -> Self {
        let mut intervals = Vec::new();
        let mut start = 0;
        for g in 0..len {
            if g + 1 == len || cuts[g] {
                intervals.push((start, g));
                start = g + 1;
            }
        }
        IntervalPartition { intervals }
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Checks the merge constraints literally: the intervals tile `0..len`,
    /// positions ranked below `k` stay alone, and a position ranked exactly
    /// `k` ends its interval.
    pub fn is_valid_for(&self, ranks: &[Rank], k: Rank) -> bool {
        let mut expected_start = 0;
        for &(lo, hi) in &self.intervals {
            if lo != expected_start || hi < lo || hi >= ranks.len() {
                return false;
            }
            for l in lo..=hi {
                if ranks[l] < k && lo != hi {
                    return false;
                }
                if ranks[l] == k && hi != l {
                    return false;
                }
            }
            expected_start = hi + 1;
        }
        expected_start == ranks.len()
    }
}

impl fmt::Display for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| {
                let items: Vec<String> = (lo..=hi).map(|p| (p + 1).to_string()).collect();
                format!("{{{}}}", items.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Result of a single transition on one symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionOutcome {
    pub successor: RankedSlice,
    pub priority: u32,
    pub green: BTreeSet<Rank>,
    pub red: BTreeSet<Rank>,
    pub dominating: Rank,
}

/// Every intermediate stage of a transition, for tracing and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionTrace {
    pub stepped: PreSlice,
    pub pruned: PreSlice,
    pub partition: IntervalPartition,
    pub merged: PreSlice,
    pub outcome: TransitionOutcome,
}

/// `Δ_t(q, x)`: successors of `q` not already reached from a set further left.
pub fn restricted_successors(
    aut: &BuchiAutomaton,
    slice: &RankedSlice,
    q: StateId,
    sym: usize,
) -> Result<StateSet> {
    let idx = slice.index_of(q)?;
    let stolen = aut.post_set(slice.sets()[..idx].iter().flatten(), sym);
    Ok(aut.post(q, sym).difference(&stolen).copied().collect())
}

/// Splits every set's restricted successors into an accepting left child
/// with a fresh rank and a non-accepting right child inheriting the rank.
pub fn step(aut: &BuchiAutomaton, slice: &RankedSlice, sym: usize) -> PreSlice {
    let n = slice.len();
    let mut sets = Vec::with_capacity(2 * n);
    let mut ranks = Vec::with_capacity(2 * n);
    let mut reached = StateSet::new();
    for (i, (set, &rank)) in slice.sets().iter().zip(slice.ranks()).enumerate() {
        let post = aut.post_set(set, sym);
        let (acc, rest): (StateSet, StateSet) = post
            .difference(&reached)
            .copied()
            .partition(|q| aut.is_accepting(*q));
        reached.extend(post);
        sets.push(acc);
        ranks.push((n + 1 + i) as Rank);
        sets.push(rest);
        ranks.push(rank);
    }
    PreSlice { sets, ranks }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub slice: PreSlice,
    pub green: BTreeSet<Rank>,
    pub red: BTreeSet<Rank>,
}

/// Removes empty sets; each survivor takes the minimum rank over itself and
/// the empty sets up to the next survivor. Ranks left of the first survivor
/// are dropped.
///
/// Only ranks `<= source_len` (ranks of the slice `step` started from) are
/// reported as green or red.
pub fn prune(pre: &PreSlice, source_len: usize) -> Pruned {
    let mut sets = Vec::new();
    let mut ranks: Vec<Rank> = Vec::new();
    let mut on_empty = BTreeSet::new();
    for (set, &rank) in pre.sets.iter().zip(&pre.ranks) {
        if set.is_empty() {
            on_empty.insert(rank);
            if let Some(last) = ranks.last_mut() {
                *last = (*last).min(rank);
            }
        } else {
            sets.push(set.clone());
            ranks.push(rank);
        }
    }
    let old = |r: &Rank| *r as usize <= source_len;
    let surviving: BTreeSet<Rank> = ranks.iter().copied().collect();
    let green = surviving
        .intersection(&on_empty)
        .copied()
        .filter(old)
        .collect();
    let red = pre
        .ranks
        .iter()
        .copied()
        .filter(|r| old(r) && !surviving.contains(r))
        .collect();
    Pruned {
        slice: PreSlice { sets, ranks },
        green,
        red,
    }
}

/// Smallest active rank and the edge priority it induces (`2k` if green,
/// `2k-1` otherwise); `|Q|+1` when nothing happened.
pub fn dominating_rank(
    green: &BTreeSet<Rank>,
    red: &BTreeSet<Rank>,
    num_states: usize,
) -> (Rank, u32) {
    let k = green
        .iter()
        .chain(red)
        .min()
        .copied()
        .unwrap_or(num_states as Rank + 1);
    let priority = if green.contains(&k) { 2 * k } else { 2 * k - 1 };
    (k, priority)
}

/// Gaps that must separate intervals: after a position ranked `<= k` and
/// before a position ranked `< k`.
fn forced_cuts(ranks: &[Rank], k: Rank) -> Vec<bool> {
    (0..ranks.len().saturating_sub(1))
        .map(|g| ranks[g] <= k || ranks[g + 1] < k)
        .collect()
}

/// Valid partitions ordered coarsest first (fewest intervals), then by the
/// positions of the optional cuts.
pub fn partitions_coarsest_first(
    ranks: &[Rank],
    k: Rank,
) -> impl Iterator<Item = IntervalPartition> + '_ {
    let forced = forced_cuts(ranks, k);
    let free: Vec<usize> = (0..forced.len()).filter(|&g| !forced[g]).collect();
    let len = ranks.len();
    (0..=free.len()).flat_map(move |extra| {
        let forced = forced.clone();
        let free = free.clone();
        free.clone()
            .into_iter()
            .combinations(extra)
            .map(move |chosen| {
                let mut cuts = forced.clone();
                for g in chosen {
                    cuts[g] = true;
                }
                IntervalPartition::from_cuts(len, &cuts)
            })
    })
}

/// Every partition the merge constraints permit, each exactly once.
pub fn valid_partitions(pre: &PreSlice, k: Rank) -> Vec<IntervalPartition> {
    if pre.sets.is_empty() {
        return vec![IntervalPartition::singletons(0)];
    }
    partitions_coarsest_first(&pre.ranks, k).collect()
}

/// Smallest intervals containing, for every green position `l`, its whole
/// subtree `←(l)+1 ..= l`.
fn safra_partition(ranks: &[Rank], green: &BTreeSet<Rank>) -> IntervalPartition {
    let len = ranks.len();
    // cover[p] = leftmost start of a green subtree span ending at or after p
    let mut spans: Vec<(usize, usize)> = (0..len)
        .filter(|&l| green.contains(&ranks[l]))
        .map(|l| (left_boundary(ranks, l).map_or(0, |b| b + 1), l))
        .collect();
    spans.sort_unstable();
    let mut cuts = vec![true; len.saturating_sub(1)];
    for (lo, hi) in spans {
        for c in cuts.iter_mut().take(hi).skip(lo) {
            *c = false;
        }
    }
    IntervalPartition::from_cuts(len, &cuts)
}

fn max_collapse_partition(ranks: &[Rank], k: Rank) -> IntervalPartition {
    IntervalPartition::from_cuts(ranks.len(), &forced_cuts(ranks, k))
}

/// Options for [`choose_partition`] beyond the strategy itself.
#[derive(Debug, Clone, Copy)]
pub struct ChoiceLimits {
    /// Maximum number of partitions the adaptive strategy inspects.
    pub adaptive_limit: usize,
}

impl Default for ChoiceLimits {
    fn default() -> Self {
        ChoiceLimits {
            adaptive_limit: 4096,
        }
    }
}

fn base_partition(
    strategy: BaseStrategy,
    pre: &PreSlice,
    k: Rank,
    green: &BTreeSet<Rank>,
) -> IntervalPartition {
    match strategy {
        BaseStrategy::MullerSchupp => IntervalPartition::singletons(pre.sets.len()),
        BaseStrategy::Safra => safra_partition(&pre.ranks, green),
        BaseStrategy::MaxCollapse => max_collapse_partition(&pre.ranks, k),
    }
}

/// Picks the merge partition for a pruned pre-slice.
///
/// `known` reports whether a macrostate already exists; only the adaptive
/// strategy consults it.
pub fn choose_partition(
    pre: &PreSlice,
    k: Rank,
    green: &BTreeSet<Rank>,
    strategy: MergeStrategy,
    known: &dyn Fn(&RankedSlice) -> bool,
    limits: ChoiceLimits,
) -> IntervalPartition {
    let base = match strategy {
        MergeStrategy::MullerSchupp => BaseStrategy::MullerSchupp,
        MergeStrategy::Safra => BaseStrategy::Safra,
        MergeStrategy::MaxCollapse => BaseStrategy::MaxCollapse,
        MergeStrategy::Adaptive { fallback } => {
            let reuse = partitions_coarsest_first(&pre.ranks, k)
                .take(limits.adaptive_limit)
                .find(|p| {
                    normalize(&merge(pre, p))
                        .map(|s| known(&s))
                        .unwrap_or(false)
                });
            if let Some(p) = reuse {
                return p;
            }
            fallback
        }
    };
    base_partition(base, pre, k, green)
}

/// Per interval: union of the sets, minimum of the ranks.
pub fn merge(pre: &PreSlice, partition: &IntervalPartition) -> PreSlice {
    let mut sets = Vec::with_capacity(partition.len());
    let mut ranks = Vec::with_capacity(partition.len());
    for &(lo, hi) in partition.intervals() {
        let mut set = StateSet::new();
        for s in &pre.sets[lo..=hi] {
            set.extend(s.iter().copied());
        }
        sets.push(set);
        ranks.push(*pre.ranks[lo..=hi].iter().min().expect("non-empty interval"));
    }
    PreSlice { sets, ranks }
}

/// Order-preserving compaction of the ranks onto `1..=n`.
pub fn normalize(pre: &PreSlice) -> Result<RankedSlice> {
    if pre.sets.iter().any(StateSet::is_empty) {
        return Err(Error::Invariant(format!("normalize on empty set in {pre}")));
    }
    if !pre.has_distinct_ranks() {
        return Err(Error::Invariant(format!(
            "normalize on duplicate ranks in {pre}"
        )));
    }
    let mut order: Vec<usize> = (0..pre.ranks.len()).collect();
    order.sort_unstable_by_key(|&i| pre.ranks[i]);
    let mut ranks = vec![0; pre.ranks.len()];
    for (new, &i) in order.iter().enumerate() {
        ranks[i] = new as Rank + 1;
    }
    RankedSlice::new(pre.sets.clone(), ranks)
}

/// Runs the full pipeline and keeps every intermediate stage.
pub fn transition_traced(
    aut: &BuchiAutomaton,
    slice: &RankedSlice,
    sym: usize,
    strategy: MergeStrategy,
    known: &dyn Fn(&RankedSlice) -> bool,
    limits: ChoiceLimits,
) -> Result<TransitionTrace> {
    if slice.is_sink() {
        let empty = PreSlice {
            sets: Vec::new(),
            ranks: Vec::new(),
        };
        return Ok(TransitionTrace {
            stepped: empty.clone(),
            pruned: empty.clone(),
            partition: IntervalPartition::singletons(0),
            merged: empty,
            outcome: TransitionOutcome {
                successor: RankedSlice::sink(),
                priority: 1,
                green: BTreeSet::new(),
                red: BTreeSet::new(),
                dominating: 1,
            },
        });
    }
    let stepped = step(aut, slice, sym);
    let Pruned {
        slice: pruned,
        green,
        red,
    } = prune(&stepped, slice.len());
    let (dominating, priority) = dominating_rank(&green, &red, aut.num_states());
    let partition = choose_partition(&pruned, dominating, &green, strategy, known, limits);
    let merged = merge(&pruned, &partition);
    let successor = normalize(&merged)?;
    Ok(TransitionTrace {
        stepped,
        pruned,
        partition,
        merged,
        outcome: TransitionOutcome {
            successor,
            priority,
            green,
            red,
            dominating,
        },
    })
}

pub fn transition(
    aut: &BuchiAutomaton,
    slice: &RankedSlice,
    sym: usize,
    strategy: MergeStrategy,
    known: &dyn Fn(&RankedSlice) -> bool,
) -> Result<TransitionOutcome> {
    transition_traced(aut, slice, sym, strategy, known, ChoiceLimits::default()).map(|t| t.outcome)
}

#[derive(Debug, Clone, Copy)]
pub struct DeterminizeOptions {
    /// Maximum number of macrostates before giving up.
    pub cap: usize,
    pub limits: ChoiceLimits,
    /// Remap priorities onto consecutive values after construction.
    pub compact_priorities: bool,
}

impl Default for DeterminizeOptions {
    fn default() -> Self {
        DeterminizeOptions {
            cap: 1_000_000,
            limits: ChoiceLimits::default(),
            compact_priorities: false,
        }
    }
}

pub fn determinize(aut: &BuchiAutomaton, strategy: MergeStrategy) -> Result<ParityAutomaton> {
    determinize_with(aut, strategy, &DeterminizeOptions::default())
}

/// Breadth-first exploration from `((Q₀), 1)`. Macrostates are numbered in
/// discovery order and labelled with their canonical slice string.
pub fn determinize_with(
    aut: &BuchiAutomaton,
    strategy: MergeStrategy,
    opts: &DeterminizeOptions,
) -> Result<ParityAutomaton> {
    determinize_observed(aut, strategy, opts, &mut |_, _, _| {})
}

/// Like [`determinize_with`], calling `observe(source, symbol, trace)` for
/// every transition as it is constructed.
pub fn determinize_observed(
    aut: &BuchiAutomaton,
    strategy: MergeStrategy,
    opts: &DeterminizeOptions,
    observe: &mut dyn FnMut(&RankedSlice, usize, &TransitionTrace),
) -> Result<ParityAutomaton> {
    let mut index: HashMap<RankedSlice, usize> = HashMap::new();
    let mut states: Vec<RankedSlice> = Vec::new();
    let mut edges: Vec<Vec<Option<Edge>>> = Vec::new();
    let mut queue = VecDeque::new();

    let init = RankedSlice::initial(aut.initial());
    index.insert(init.clone(), 0);
    states.push(init);
    queue.push_back(0);

    while let Some(id) = queue.pop_front() {
        let mut row = Vec::with_capacity(aut.alphabet().len());
        for sym in 0..aut.alphabet().len() {
            let known = |s: &RankedSlice| index.contains_key(s);
            let trace = transition_traced(aut, &states[id], sym, strategy, &known, opts.limits)?;
            observe(&states[id], sym, &trace);
            let outcome = trace.outcome;
            let target = match index.get(&outcome.successor) {
                Some(&t) => t,
                None => {
                    if states.len() >= opts.cap {
                        return Err(Error::CapacityExceeded { cap: opts.cap });
                    }
                    let t = states.len();
                    index.insert(outcome.successor.clone(), t);
                    states.push(outcome.successor);
                    queue.push_back(t);
                    t
                }
            };
            row.push(Some(Edge {
                target,
                priority: outcome.priority,
            }));
        }
        edges.push(row);
    }

    let labels = states.iter().map(|s| Some(s.to_string())).collect();
    let dpa = ParityAutomaton::new(aut.alphabet().to_vec(), 0, edges, labels)?;
    Ok(if opts.compact_priorities {
        dpa.compact_priorities()
    } else {
        dpa
    })
}
