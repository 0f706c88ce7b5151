//! Ground truth for lasso membership, lasso enumeration and sampling,
//! reduced split-tree levels, and random automata for test corpora.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::nba::{BuchiAutomaton, Lasso, StateId, StateSet};

/// An ultimately periodic run `prefix · cycle^ω`.
///
/// `prefix.len()` is at least the stem length and `cycle.len()` is a
/// multiple of the word's cycle length, so the run reads the word exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub prefix: Vec<StateId>,
    pub cycle: Vec<StateId>,
}

impl Witness {
    /// State at position `i` of the infinite run.
    pub fn state_at(&self, i: usize) -> StateId {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Checks the run against the automaton and the word.
    pub fn is_accepting_run(&self, aut: &BuchiAutomaton, stem: &[usize], cycle: &[usize]) -> bool {
        let sym = |i: usize| {
            if i < stem.len() {
                stem[i]
            } else {
                cycle[(i - stem.len()) % cycle.len()]
            }
        };
        let total = self.prefix.len() + self.cycle.len();
        !self.cycle.is_empty()
            && self.prefix.len() >= stem.len()
            && self.cycle.len().is_multiple_of(cycle.len())
            && aut.initial().contains(&self.state_at(0))
            && self.cycle.iter().any(|q| aut.is_accepting(*q))
            && (0..total).all(|i| {
                aut.post(self.state_at(i), sym(i))
                    .contains(&self.state_at(i + 1))
            })
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[StateId]| {
            v.iter()
                .map(|q| format!("q{q}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(f, "{} ({})^ω", show(&self.prefix), show(&self.cycle))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub witness: Option<Witness>,
}

/// Membership of `stem · cycle^ω` via a search in the product of the
/// automaton with the word positions `0..|stem|+|cycle|`, where the last
/// position wraps back to `|stem|`.
pub fn nba_accepts_indices(aut: &BuchiAutomaton, stem: &[usize], cycle: &[usize]) -> Verdict {
    assert!(!cycle.is_empty(), "cycle must be non-empty");
    let len = stem.len() + cycle.len();
    let sym = |p: usize| {
        if p < stem.len() {
            stem[p]
        } else {
            cycle[p - stem.len()]
        }
    };
    let next = |p: usize| if p + 1 == len { stem.len() } else { p + 1 };
    type Node = (StateId, usize);
    let succ = |(q, p): Node| aut.post(q, sym(p)).iter().map(move |&r| (r, next(p)));

    // forward BFS from the initial nodes, remembering predecessors
    let mut pred: HashMap<Node, Option<Node>> = HashMap::new();
    let mut order = Vec::new();
    let mut queue: VecDeque<Node> = aut.initial().iter().map(|&q| (q, 0)).collect();
    for &n in &queue {
        pred.insert(n, None);
    }
    while let Some(n) = queue.pop_front() {
        order.push(n);
        for m in succ(n) {
            pred.entry(m).or_insert_with(|| {
                queue.push_back(m);
                Some(n)
            });
        }
    }

    for &target in &order {
        let (q, p) = target;
        if p < stem.len() || !aut.is_accepting(q) {
            continue;
        }
        if let Some(back) = bfs_path(target, target, &succ) {
            let mut prefix = vec![target.0];
            let mut cur = target;
            while let Some(prev) = pred[&cur] {
                prefix.push(prev.0);
                cur = prev;
            }
            prefix.reverse();
            prefix.pop();
            return Verdict {
                accepted: true,
                witness: Some(Witness {
                    prefix,
                    cycle: back,
                }),
            };
        }
    }
    Verdict {
        accepted: false,
        witness: None,
    }
}

/// States of a non-empty path from `from` back to `to` (excluding the final
/// `to`), shortest first.
fn bfs_path<N, I>(from: N, to: N, succ: &impl Fn(N) -> I) -> Option<Vec<StateId>>
where
    N: Copy + Eq + std::hash::Hash + Into<(StateId, usize)>,
    I: Iterator<Item = N>,
{
    let mut pred: HashMap<N, N> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for m in succ(n) {
            if m == to {
                let mut path = vec![n.into().0];
                let mut cur = n;
                while cur != from {
                    cur = pred[&cur];
                    path.push(cur.into().0);
                }
                path.reverse();
                return Some(path);
            }
            if m != from && !pred.contains_key(&m) {
                pred.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    None
}

pub fn nba_accepts_lasso(aut: &BuchiAutomaton, lasso: &Lasso) -> Result<Verdict> {
    let (stem, cycle) = lasso.to_indices(aut.alphabet())?;
    Ok(nba_accepts_indices(aut, &stem, &cycle))
}

type Relation = Vec<Vec<bool>>;

/// Independent membership check through summaries of one pass over the
/// cycle: `reach[p][q]` if some run on the cycle word leads from `p` to `q`,
/// `acc[p][q]` if one of those runs visits an accepting state after leaving
/// `p`. Accepts iff some state reachable at a cycle boundary lies on an
/// `acc`-edge that can be closed again by `reach*`.
pub fn nba_accepts_by_summaries(aut: &BuchiAutomaton, stem: &[usize], cycle: &[usize]) -> bool {
    assert!(!cycle.is_empty(), "cycle must be non-empty");
    let n = aut.num_states();
    let mut reach: Relation = vec![vec![false; n]; n];
    let mut acc: Relation = vec![vec![false; n]; n];
    for p in 0..n {
        // (state, seen accepting) frontier
        let mut cur = vec![[false; 2]; n];
        cur[p][0] = true;
        for &x in cycle {
            let mut nxt = vec![[false; 2]; n];
            for q in 0..n {
                for seen in 0..2 {
                    if !cur[q][seen] {
                        continue;
                    }
                    for r in aut.post(StateId(q as u32), x) {
                        let s = usize::from(seen == 1 || aut.is_accepting(*r));
                        nxt[r.index()][s] = true;
                    }
                }
            }
            cur = nxt;
        }
        for q in 0..n {
            reach[p][q] = cur[q][0] || cur[q][1];
            acc[p][q] = cur[q][1];
        }
    }
    let closure = reflexive_transitive_closure(&reach);

    let mut start: StateSet = aut.initial().clone();
    for &x in stem {
        start = aut.post_set(&start, x);
    }
    let boundary: Vec<bool> = (0..n)
        .map(|q| start.iter().any(|s| closure[s.index()][q]))
        .collect();
    (0..n).any(|p| boundary[p] && (0..n).any(|q| acc[p][q] && closure[q][p]))
}

fn reflexive_transitive_closure(rel: &Relation) -> Relation {
    let n = rel.len();
    let mut c = rel.clone();
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if c[i][k] {
                for j in 0..n {
                    if c[k][j] {
                        c[i][j] = true;
                    }
                }
            }
        }
    }
    c
}

/// All words over `0..k` with length in `min..=max`, shortest first, then
/// lexicographically.
pub fn words(k: usize, min: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 0..=max {
        if len >= min {
            out.extend(layer.iter().cloned());
        }
        if len < max {
            layer = layer
                .iter()
                .flat_map(|w| {
                    (0..k).map(move |x| {
                        let mut w = w.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
    }
    out
}

/// Every `(stem, cycle)` index pair with `|stem| <= max_stem` and
/// `1 <= |cycle| <= max_cycle`; stems vary slowest.
pub fn enumerate_lasso_indices(
    k: usize,
    max_stem: usize,
    max_cycle: usize,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let cycles = words(k, 1, max_cycle);
    words(k, 0, max_stem)
        .into_iter()
        .flat_map(|u| cycles.iter().map(move |v| (u.clone(), v.clone())))
        .collect()
}

pub fn enumerate_lassos(alphabet: &[String], max_stem: usize, max_cycle: usize) -> Vec<Lasso> {
    enumerate_lasso_indices(alphabet.len(), max_stem, max_cycle)
        .into_iter()
        .map(|(u, v)| to_lasso(alphabet, &u, &v))
        .collect()
}

pub fn to_lasso(alphabet: &[String], stem: &[usize], cycle: &[usize]) -> Lasso {
    let name = |w: &[usize]| w.iter().map(|&x| alphabet[x].clone()).collect();
    Lasso {
        stem: name(stem),
        cycle: name(cycle),
    }
}

/// `count` lassos with lengths drawn uniformly from the bounds.
pub fn sample_lassos(
    alphabet: &[String],
    max_stem: usize,
    max_cycle: usize,
    count: usize,
    seed: u64,
) -> Vec<Lasso> {
    assert!(max_cycle >= 1 && !alphabet.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = rng.gen_range(0..=max_stem);
            let v = rng.gen_range(1..=max_cycle);
            let mut word = |len: usize| -> Vec<usize> {
                (0..len).map(|_| rng.gen_range(0..alphabet.len())).collect()
            };
            let (stem, cycle) = (word(u), word(v));
            to_lasso(alphabet, &stem, &cycle)
        })
        .collect()
}

/// One level of the reduced split tree: disjoint, non-empty sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitTreeLevel(pub Vec<StateSet>);

impl fmt::Display for SplitTreeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| {
                let qs: Vec<String> = s.iter().map(|q| format!("q{q}")).collect();
                format!("{{{}}}", qs.join(","))
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Levels `0..=|prefix|` of the reduced split tree.
pub fn split_tree_levels(aut: &BuchiAutomaton, prefix: &[usize]) -> Vec<SplitTreeLevel> {
    let mut level = SplitTreeLevel(vec![aut.initial().clone()]);
    let mut out = vec![level.clone()];
    for &x in prefix {
        let mut children: Vec<Vec<StateId>> = Vec::new();
        for node in &level.0 {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for q in node {
                for &r in aut.post(*q, x) {
                    if aut.is_accepting(r) {
                        left.push(r);
                    } else {
                        right.push(r);
                    }
                }
            }
            children.push(left);
            children.push(right);
        }
        // keep only the leftmost occurrence of each state
        let mut seen = vec![false; aut.num_states()];
        let sets = children
            .into_iter()
            .map(|c| {
                c.into_iter()
                    .filter(|q| !std::mem::replace(&mut seen[q.index()], true))
                    .collect::<StateSet>()
            })
            .filter(|s| !s.is_empty())
            .collect();
        level = SplitTreeLevel(sets);
        out.push(level.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNbaParams {
    pub num_states: usize,
    pub alphabet_size: usize,
    /// Probability of each `(source, symbol, target)` triple.
    pub density: f64,
    /// Probability of each state being accepting.
    pub accepting_fraction: f64,
}

pub fn alphabet_of_size(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect()
}

/// Random automaton with the single initial state 0.
pub fn random_nba(params: &RandomNbaParams, rng: &mut impl Rng) -> BuchiAutomaton {
    let n = params.num_states;
    let alphabet = alphabet_of_size(params.alphabet_size);
    let mut transitions = Vec::new();
    for src in 0..n {
        for sym in &alphabet {
            for dst in 0..n {
                if rng.gen_bool(params.density) {
                    transitions.push((src as u32, sym.clone(), dst as u32));
                }
            }
        }
    }
    let accepting: Vec<u32> = (0..n as u32)
        .filter(|_| rng.gen_bool(params.accepting_fraction))
        .collect();
    BuchiAutomaton::new(n, alphabet, transitions, [0], accepting)
        .expect("generated automaton is well formed")
}

/// Reproducible corpus; sizes are drawn uniformly from `1..=max_states` and
/// `1..=max_alphabet`.
pub fn random_corpus(
    count: usize,
    max_states: usize,
    max_alphabet: usize,
    density: f64,
    accepting_fraction: f64,
    seed: u64,
) -> Vec<BuchiAutomaton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let params = RandomNbaParams {
                num_states: rng.gen_range(1..=max_states),
                alphabet_size: rng.gen_range(1..=max_alphabet),
                density,
                accepting_fraction,
            };
            random_nba(&params, &mut rng)
        })
        .collect()
}
