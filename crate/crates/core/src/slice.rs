//! Ranked slices, pre-slices and their rank-tree view.
//!
//! A ranked slice is a tuple `(S₁,…,Sₙ)` of non-empty, pairwise disjoint
//! state sets together with a bijective ranking `[n] → [n]` that assigns
//! rank 1 to the rightmost set. The rank tree is induced by the parent
//! relation "closest position to the right with a smaller rank".
//!
//! Positions are 0-based throughout this crate. Where the textbook notation
//! uses position 0 for "no left boundary", the functions here return `None`.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nba::{StateId, StateSet};

pub type Rank = u32;

/// Closest position to the right of `i` with a smaller rank.
///
/// Ranks must be pairwise distinct; `None` only for the position holding the
/// minimum rank when it is the rightmost one (the root).
pub fn parent(ranks: &[Rank], i: usize) -> Option<usize> {
    (i + 1..ranks.len()).find(|&k| ranks[k] < ranks[i])
}

/// Closest position to the left of `i` with a smaller rank, if any.
pub fn left_boundary(ranks: &[Rank], i: usize) -> Option<usize> {
    (0..i).rev().find(|&k| ranks[k] < ranks[i])
}

/// Positions making up the subtree of the node at position `i`.
pub fn subtree_range(ranks: &[Rank], i: usize) -> RangeInclusive<usize> {
    let start = left_boundary(ranks, i).map_or(0, |k| k + 1);
    start..=i
}

/// Shared rank-tree view over slices and pre-slices.
pub trait RankTree {
    fn sets(&self) -> &[StateSet];
    fn ranks(&self) -> &[Rank];

    fn len(&self) -> usize {
        self.sets().len()
    }

    fn is_empty(&self) -> bool {
        self.sets().is_empty()
    }

    /// `Q_t`, the union of all sets.
    fn states(&self) -> StateSet {
        self.sets().iter().flatten().copied().collect()
    }

    fn index_of(&self, q: StateId) -> Result<usize> {
        self.sets()
            .iter()
            .position(|s| s.contains(&q))
            .ok_or(Error::StateNotPresent(q))
    }

    fn rank_of(&self, q: StateId) -> Result<Rank> {
        Ok(self.ranks()[self.index_of(q)?])
    }

    fn parent(&self, i: usize) -> Option<usize> {
        parent(self.ranks(), i)
    }

    fn left_boundary(&self, i: usize) -> Option<usize> {
        left_boundary(self.ranks(), i)
    }

    /// Union of the sets hosted in the subtree of position `i`.
    fn subtree_set(&self, i: usize) -> StateSet {
        let sets = self.sets();
        subtree_range(self.ranks(), i)
            .flat_map(|k| sets[k].iter().copied())
            .collect()
    }

    /// Ranks along the rank tree from the root down to the node hosting `q`.
    fn rank_profile(&self, q: StateId) -> Result<RankProfile> {
        let ranks = self.ranks();
        let mut pos = self.index_of(q)?;
        let mut out = vec![ranks[pos]];
        while let Some(p) = parent(ranks, pos) {
            out.push(ranks[p]);
            pos = p;
        }
        out.reverse();
        Ok(RankProfile(out))
    }
}

/// A macrostate of the constructed parity automaton.
///
/// The empty tuple is admitted and stands for the rejecting sink reached
/// when every run dies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RankedSlice {
    sets: Vec<StateSet>,
    ranks: Vec<Rank>,
}

impl RankedSlice {
    pub fn new(sets: Vec<StateSet>, ranks: Vec<Rank>) -> Result<Self> {
        let n = sets.len();
        if ranks.len() != n {
            return Err(Error::InvalidSlice(format!(
                "{n} sets but {} ranks",
                ranks.len()
            )));
        }
        if sets.iter().any(StateSet::is_empty) {
            return Err(Error::InvalidSlice("empty set in ranked slice".into()));
        }
        check_disjoint(&sets)?;
        let mut seen = vec![false; n + 1];
        for &r in &ranks {
            let r = r as usize;
            if r == 0 || r > n || seen[r] {
                return Err(Error::InvalidSlice(format!(
                    "ranks {ranks:?} are not a bijection onto 1..={n}"
                )));
            }
            seen[r] = true;
        }
        if n > 0 && ranks[n - 1] != 1 {
            return Err(Error::InvalidSlice(
                "rightmost set must carry rank 1".into(),
            ));
        }
        Ok(RankedSlice { sets, ranks })
    }

    /// The initial macrostate `((Q₀), 1)`.
    pub fn initial(initial: &StateSet) -> Self {
        RankedSlice {
            sets: vec![initial.clone()],
            ranks: vec![1],
        }
    }

    pub fn sink() -> Self {
        RankedSlice {
            sets: Vec::new(),
            ranks: Vec::new(),
        }
    }

    pub fn is_sink(&self) -> bool {
        self.sets.is_empty()
    }

    pub(crate) fn from_parts_unchecked(sets: Vec<StateSet>, ranks: Vec<Rank>) -> Self {
        debug_assert!(RankedSlice::new(sets.clone(), ranks.clone()).is_ok());
        RankedSlice { sets, ranks }
    }

    pub fn into_parts(self) -> (Vec<StateSet>, Vec<Rank>) {
        (self.sets, self.ranks)
    }

    pub fn to_pre_slice(&self) -> PreSlice {
        PreSlice {
            sets: self.sets.clone(),
            ranks: self.ranks.clone(),
        }
    }
}

impl RankTree for RankedSlice {
    fn sets(&self) -> &[StateSet] {
        &self.sets
    }

    fn ranks(&self) -> &[Rank] {
        &self.ranks
    }
}

/// Intermediate tuple during a transition: empty sets and non-bijective
/// rankings are allowed, disjointness is not negotiable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreSlice {
    pub sets: Vec<StateSet>,
    pub ranks: Vec<Rank>,
}

impl PreSlice {
    pub fn new(sets: Vec<StateSet>, ranks: Vec<Rank>) -> Result<Self> {
        if ranks.len() != sets.len() {
            return Err(Error::InvalidSlice(format!(
                "{} sets but {} ranks",
                sets.len(),
                ranks.len()
            )));
        }
        if ranks.contains(&0) {
            return Err(Error::InvalidSlice("ranks must be positive".into()));
        }
        check_disjoint(&sets)?;
        Ok(PreSlice { sets, ranks })
    }

    pub fn has_distinct_ranks(&self) -> bool {
        let mut seen = HashSet::new();
        self.ranks.iter().all(|r| seen.insert(*r))
    }

    pub fn is_disjoint(&self) -> bool {
        check_disjoint(&self.sets).is_ok()
    }
}

impl RankTree for PreSlice {
    fn sets(&self) -> &[StateSet] {
        &self.sets
    }

    fn ranks(&self) -> &[Rank] {
        &self.ranks
    }
}

fn check_disjoint(sets: &[StateSet]) -> Result<()> {
    let mut seen = HashSet::new();
    for q in sets.iter().flatten() {
        if !seen.insert(*q) {
            return Err(Error::InvalidSlice(format!("state {q} occurs twice")));
        }
    }
    Ok(())
}

fn write_tuple(f: &mut fmt::Formatter<'_>, sets: &[StateSet], ranks: &[Rank]) -> fmt::Result {
    f.write_str("(")?;
    for (i, (set, rank)) in sets.iter().zip(ranks).enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write_set(f, set)?;
        write!(f, ":{rank}")?;
    }
    f.write_str(")")
}

pub(crate) fn write_set(f: &mut impl fmt::Write, set: &StateSet) -> fmt::Result {
    f.write_str("{")?;
    for (i, q) in set.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{q}")?;
    }
    f.write_str("}")
}

/// Canonical form, e.g. `({3}:4,{1}:2,{2}:3,{0}:1)`.
impl fmt::Display for RankedSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.sets, &self.ranks)
    }
}

impl fmt::Display for PreSlice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.sets, &self.ranks)
    }
}

/// Small cursor used by the slice and tree parsers.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> std::result::Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}` at offset {}", self.pos))
        }
    }

    pub(crate) fn number(&mut self) -> std::result::Result<u32, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return Err(format!("expected a number at offset {}", self.pos));
        }
        self.pos += len;
        rest[..len]
            .parse()
            .map_err(|_| format!("number out of range at offset {}", self.pos))
    }

    pub(crate) fn set(&mut self) -> std::result::Result<StateSet, String> {
        self.expect('{')?;
        let mut out = StateSet::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            let q = StateId(self.number()?);
            if !out.insert(q) {
                return Err(format!("state {q} repeated within a set"));
            }
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    pub(crate) fn finish(&mut self) -> std::result::Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(format!("trailing `{c}` at offset {}", self.pos)),
        }
    }
}

fn parse_tuple(s: &str) -> std::result::Result<(Vec<StateSet>, Vec<Rank>), String> {
    let mut cur = Cursor::new(s);
    cur.expect('(')?;
    let mut sets = Vec::new();
    let mut ranks = Vec::new();
    if !cur.eat(')') {
        loop {
            sets.push(cur.set()?);
            cur.expect(':')?;
            ranks.push(cur.number()?);
            if cur.eat(')') {
                break;
            }
            cur.expect(',')?;
        }
    }
    cur.finish()?;
    Ok((sets, ranks))
}

impl FromStr for RankedSlice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sets, ranks) = parse_tuple(s).map_err(Error::InvalidSlice)?;
        RankedSlice::new(sets, ranks)
    }
}

impl FromStr for PreSlice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sets, ranks) = parse_tuple(s).map_err(Error::InvalidSlice)?;
        PreSlice::new(sets, ranks)
    }
}

/// Strictly ascending rank sequence from the root to the node hosting a state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankProfile(pub Vec<Rank>);

impl RankProfile {
    /// `Less` when `self` is better than `other`.
    ///
    /// Lexicographic on the common prefix; if that is equal, the longer
    /// profile is better (a strict prefix is worse, not better).
    pub fn better_cmp(&self, other: &RankProfile) -> Ordering {
        let m = self.0.len().min(other.0.len());
        match self.0[..m].cmp(&other.0[..m]) {
            Ordering::Equal => other.0.len().cmp(&self.0.len()),
            ord => ord,
        }
    }

    /// All ranks below `k` plus the first rank `>= k`, if there is one.
    pub fn k_cut(&self, k: Rank) -> RankProfile {
        let end = self
            .0
            .iter()
            .position(|&r| r >= k)
            .map_or(self.0.len(), |i| i + 1);
        RankProfile(self.0[..end].to_vec())
    }

    /// Compares the `k`-cuts under [`RankProfile::better_cmp`].
    pub fn better_cmp_at(&self, other: &RankProfile, k: Rank) -> Ordering {
        self.k_cut(k).better_cmp(&other.k_cut(k))
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.0
    }
}

impl fmt::Display for RankProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Rank::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::nba::state_set;
    use proptest::prelude::*;

    fn example() -> RankedSlice {
        "({3}:4,{1}:2,{2}:3,{0}:1)".parse().unwrap()
    }

    #[test]
    fn canonical_string_round_trip() {
        let s = example();
        assert_eq!(s.to_string(), "({3}:4,{1}:2,{2}:3,{0}:1)");
        let t: RankedSlice = " ( {1, 2,3}:2 , {0}:1 ) ".parse().unwrap();
        assert_eq!(t.to_string(), "({1,2,3}:2,{0}:1)");
        assert_eq!(RankedSlice::sink().to_string(), "()");
        assert_eq!("()".parse::<RankedSlice>().unwrap(), RankedSlice::sink());
    }

    #[test]
    fn rejects_invalid_slices() {
        for bad in [
            "({0}:1,{1}:2)",
            "({0}:1,{0}:2)",
            "({}:2,{0}:1)",
            "({0}:3,{1}:1)",
            "({0}:1,{1}:1)",
            "({0}:1",
            "({0}:1)x",
        ] {
            assert!(bad.parse::<RankedSlice>().is_err(), "{bad}");
        }
        assert!("({}:2,{0}:1)".parse::<PreSlice>().is_ok());
    }

    #[test]
    fn index_of_examples() {
        let s = example();
        assert_eq!(s.index_of(StateId(2)).unwrap(), 2);
        let single = RankedSlice::initial(&state_set([0]));
        assert_eq!(single.index_of(StateId(0)).unwrap(), 0);
        assert_eq!(
            s.index_of(StateId(9)),
            Err(Error::StateNotPresent(StateId(9)))
        );
    }

    #[test]
    fn parent_and_left_boundary_examples() {
        let s = example();
        // 1-based: ↑(1)=2, ↑(2)=↑(3)=4, ←(3)=2
        assert_eq!(s.parent(0), Some(1));
        assert_eq!(s.parent(1), Some(3));
        assert_eq!(s.parent(2), Some(3));
        assert_eq!(s.parent(3), None);
        assert_eq!(s.left_boundary(2), Some(1));
        assert_eq!(s.left_boundary(0), None);
        assert_eq!(s.left_boundary(3), None);
        assert_eq!(RankedSlice::initial(&state_set([0])).parent(0), None);
    }

    #[test]
    fn decreasing_ranks_form_a_chain() {
        let ranks: Vec<Rank> = (1..=6).rev().collect();
        for i in 0..5 {
            assert_eq!(parent(&ranks, i), Some(i + 1));
            assert_eq!(left_boundary(&ranks, i), None);
        }
    }

    #[test]
    fn subtree_set_examples() {
        let s = example();
        assert_eq!(s.subtree_set(2), state_set([2]));
        assert_eq!(s.subtree_set(3), s.states());
        assert_eq!(s.subtree_set(0), state_set([3]));
        assert_eq!(s.subtree_set(1), state_set([1, 3]));
    }

    #[test]
    fn rank_profile_examples() {
        let s = example();
        assert_eq!(s.rank_profile(StateId(3)).unwrap().0, vec![1, 2, 4]);
        assert_eq!(s.rank_profile(StateId(2)).unwrap().0, vec![1, 3]);
        assert_eq!(s.rank_profile(StateId(0)).unwrap().0, vec![1]);
        assert!(s.rank_profile(StateId(7)).is_err());
    }

    #[test]
    fn profile_order_examples() {
        let a = RankProfile(vec![1, 2, 4]);
        let b = RankProfile(vec![1, 3]);
        assert_eq!(a.better_cmp(&b), Ordering::Less);
        assert_eq!(b.better_cmp(&a), Ordering::Greater);
        let p = RankProfile(vec![1, 2]);
        assert_eq!(a.better_cmp(&p), Ordering::Less);
        assert_eq!(a.better_cmp(&a), Ordering::Equal);
        // 1,2,4 =_2 1,2,5 but 1,2,4 ≺_3 1,2,5
        let c = RankProfile(vec![1, 2, 5]);
        assert_eq!(a.better_cmp_at(&c, 2), Ordering::Equal);
        assert_eq!(a.better_cmp_at(&c, 3), Ordering::Less);
    }

    #[test]
    fn k_cut_examples() {
        let a = RankProfile(vec![1, 2, 4]);
        assert_eq!(a.k_cut(3).0, vec![1, 2, 4]);
        assert_eq!(a.k_cut(4).0, vec![1, 2, 4]);
        assert_eq!(a.k_cut(9).0, vec![1, 2, 4]);
        assert_eq!(a.k_cut(2).0, vec![1, 2]);
        assert_eq!(a.k_cut(1).0, vec![1]);
    }

    /// Random ranked slice over states `0..n_states` with `len` sets.
    pub(crate) fn arb_slice(max_len: usize) -> impl Strategy<Value = RankedSlice> {
        (1..=max_len)
            .prop_flat_map(|n| {
                let perm = Just((2..=n as Rank).collect::<Vec<_>>()).prop_shuffle();
                let extra = proptest::collection::vec(0..n, 0..4);
                (Just(n), perm, extra)
            })
            .prop_map(|(n, mut perm, extra)| {
                perm.push(1);
                let mut sets: Vec<StateSet> = (0..n).map(|i| state_set([i as u32])).collect();
                for (j, host) in extra.into_iter().enumerate() {
                    sets[host].insert(StateId((n + j) as u32));
                }
                RankedSlice::new(sets, perm).unwrap()
            })
    }

    proptest! {
        #[test]
        fn index_order_matches_profile_order(s in arb_slice(8)) {
            let states: Vec<StateId> = s.states().into_iter().collect();
            for &p in &states {
                for &q in &states {
                    let by_index = s.index_of(p).unwrap() < s.index_of(q).unwrap();
                    let by_profile = s.rank_profile(p).unwrap()
                        .better_cmp(&s.rank_profile(q).unwrap()) == Ordering::Less;
                    prop_assert_eq!(by_index, by_profile);
                }
            }
        }

        #[test]
        fn parent_links_reach_the_root(s in arb_slice(10)) {
            let n = s.len();
            for i in 0..n {
                let mut pos = i;
                let mut steps = 0;
                while let Some(p) = s.parent(pos) {
                    prop_assert!(p > pos);
                    pos = p;
                    steps += 1;
                }
                prop_assert_eq!(pos, n - 1);
                prop_assert!(steps < n);
            }
            prop_assert_eq!(s.subtree_set(n - 1), s.states());
        }

        #[test]
        fn sibling_subtrees_are_disjoint(s in arb_slice(10)) {
            let n = s.len();
            for i in 0..n {
                for j in i + 1..n {
                    if s.parent(i) == s.parent(j) {
                        prop_assert!(s.subtree_set(i).is_disjoint(&s.subtree_set(j)));
                    }
                }
            }
        }

        #[test]
        fn k_cut_bounds(ranks in proptest::collection::btree_set(2u32..20, 0..6)) {
            let mut v = vec![1];
            v.extend(ranks);
            let p = RankProfile(v);
            let max = *p.0.last().unwrap();
            prop_assert_eq!(p.k_cut(max + 1), p.clone());
            prop_assert_eq!(p.k_cut(1).0, vec![1]);
        }
    }
}
