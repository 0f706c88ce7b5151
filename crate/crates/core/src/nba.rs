//! Nondeterministic Büchi automata, lasso words and the `.nba` text format.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense index of a Büchi state, `0..num_states`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for StateId {
    fn from(v: u32) -> Self {
        StateId(v)
    }
}

/// Sets of states are kept in ascending id order everywhere.
pub type StateSet = BTreeSet<StateId>;

/// Builds a [`StateSet`] from raw ids; handy in tests and examples.
pub fn state_set<I: IntoIterator<Item = u32>>(ids: I) -> StateSet {
    ids.into_iter().map(StateId).collect()
}

/// A nondeterministic Büchi automaton `(Q, Σ, Δ, Q₀, F)`.
///
/// The automaton need not be complete. Values are immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    num_states: usize,
    alphabet: Vec<String>,
    // delta[state][symbol] = successor set
    delta: Vec<Vec<StateSet>>,
    initial: StateSet,
    accepting: StateSet,
}

impl BuchiAutomaton {
    /// Builds an automaton from transitions given as `(source, symbol, target)`
    /// with symbols as alphabet tokens.
    pub fn new<S: AsRef<str>>(
        num_states: usize,
        alphabet: Vec<String>,
        transitions: impl IntoIterator<Item = (u32, S, u32)>,
        initial: impl IntoIterator<Item = u32>,
        accepting: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        let mut aut = Self::with_alphabet(num_states, alphabet)?;
        for (src, sym, dst) in transitions {
            let sym = aut.symbol_index(sym.as_ref())?;
            aut.add_transition(StateId(src), sym, StateId(dst))?;
        }
        aut.initial = aut.checked_set(initial, "initial")?;
        aut.accepting = aut.checked_set(accepting, "accepting")?;
        aut.validate()?;
        Ok(aut)
    }

    fn with_alphabet(num_states: usize, alphabet: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for tok in &alphabet {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) || tok == "|" {
                return Err(Error::InvalidAutomaton(format!(
                    "illegal alphabet token `{tok}`"
                )));
            }
            if !seen.insert(tok.as_str()) {
                return Err(Error::InvalidAutomaton(format!(
                    "duplicate alphabet token `{tok}`"
                )));
            }
        }
        Ok(BuchiAutomaton {
            num_states,
            delta: vec![vec![StateSet::new(); alphabet.len()]; num_states],
            alphabet,
            initial: StateSet::new(),
            accepting: StateSet::new(),
        })
    }

    fn checked_set(&self, ids: impl IntoIterator<Item = u32>, what: &str) -> Result<StateSet> {
        let set = state_set(ids);
        if let Some(bad) = set.iter().find(|q| q.index() >= self.num_states) {
            return Err(Error::InvalidAutomaton(format!(
                "{what} state {bad} out of range for {} states",
                self.num_states
            )));
        }
        Ok(set)
    }

    fn add_transition(&mut self, src: StateId, sym: usize, dst: StateId) -> Result<()> {
        for q in [src, dst] {
            if q.index() >= self.num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "transition endpoint {q} out of range for {} states",
                    self.num_states
                )));
            }
        }
        self.delta[src.index()][sym].insert(dst);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.initial.is_empty() {
            return Err(Error::InvalidAutomaton("no initial state".into()));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn accepting(&self) -> &StateSet {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.contains(&q)
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    /// `Δ(q, x)` for a symbol given by alphabet index.
    pub fn post(&self, q: StateId, sym: usize) -> &StateSet {
        &self.delta[q.index()][sym]
    }

    /// `Δ(P, x)` for a symbol given by alphabet index.
    pub fn post_set<'a>(
        &self,
        source: impl IntoIterator<Item = &'a StateId>,
        sym: usize,
    ) -> StateSet {
        let mut out = StateSet::new();
        for &p in source {
            out.extend(self.delta[p.index()][sym].iter().copied());
        }
        out
    }

    /// `Δ(P, x) = ⋃_{p∈P} Δ(p, x)`.
    pub fn successors(&self, source: &StateSet, symbol: &str) -> Result<StateSet> {
        let sym = self.symbol_index(symbol)?;
        if let Some(bad) = source.iter().find(|q| q.index() >= self.num_states) {
            return Err(Error::StateNotPresent(*bad));
        }
        Ok(self.post_set(source, sym))
    }

    /// All transitions in canonical order `(source, symbol index, target)`.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, usize, StateId)> + '_ {
        self.delta.iter().enumerate().flat_map(|(src, row)| {
            row.iter().enumerate().flat_map(move |(sym, targets)| {
                targets
                    .iter()
                    .map(move |&dst| (StateId(src as u32), sym, dst))
            })
        })
    }

    pub fn num_transitions(&self) -> usize {
        self.delta.iter().flatten().map(BTreeSet::len).sum()
    }

    /// Canonical `.nba` rendering.
    pub fn to_nba_string(&self) -> String {
        let mut out = String::from("nba\n");
        out.push_str(&format!("states {}\n", self.num_states));
        out.push_str("alphabet");
        for tok in &self.alphabet {
            out.push(' ');
            out.push_str(tok);
        }
        out.push('\n');
        push_id_line(&mut out, "init", &self.initial);
        push_id_line(&mut out, "accept", &self.accepting);
        for (src, sym, dst) in self.transitions() {
            out.push_str(&format!("{src} {} {dst}\n", self.alphabet[sym]));
        }
        out
    }
}

fn push_id_line(out: &mut String, keyword: &str, ids: &StateSet) {
    out.push_str(keyword);
    for q in ids {
        out.push_str(&format!(" {q}"));
    }
    out.push('\n');
}

/// Parses the `.nba` text format.
///
/// ```text
/// nba
/// states 3
/// alphabet a
/// init 0
/// accept 1
/// 0 a 0
/// ```
///
/// `#` starts a comment. Header lines may appear in any order but must
/// precede the first transition line; `accept` may be omitted.
pub fn parse_nba(text: &str) -> Result<BuchiAutomaton> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, toks)) if toks == ["nba"] => {}
        Some((no, _)) => return Err(Error::syntax(no, "expected `nba` header")),
        None => return Err(Error::syntax(1, "empty input")),
    }

    let mut num_states: Option<usize> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut initial: Option<(usize, Vec<u32>)> = None;
    let mut accepting: Option<(usize, Vec<u32>)> = None;
    let mut transitions: Vec<(usize, u32, String, u32)> = Vec::new();

    for (no, toks) in lines {
        let dup = |seen: bool| -> Result<()> {
            if seen {
                Err(Error::syntax(no, format!("duplicate `{}` line", toks[0])))
            } else {
                Ok(())
            }
        };
        let header = !transitions.is_empty();
        match toks[0] {
            "states" | "alphabet" | "init" | "accept" if header => {
                return Err(Error::syntax(no, "header line after transitions"));
            }
            "states" => {
                dup(num_states.is_some())?;
                if toks.len() != 2 {
                    return Err(Error::syntax(no, "expected `states <n>`"));
                }
                num_states = Some(parse_num(no, toks[1])? as usize);
            }
            "alphabet" => {
                dup(alphabet.is_some())?;
                let toks: Vec<String> = toks[1..].iter().map(|s| s.to_string()).collect();
                let mut seen = HashSet::new();
                for tok in &toks {
                    if !seen.insert(tok) {
                        return Err(Error::syntax(
                            no,
                            format!("duplicate alphabet token `{tok}`"),
                        ));
                    }
                    if tok == "|" {
                        return Err(Error::syntax(no, "`|` is reserved"));
                    }
                }
                alphabet = Some(toks);
            }
            "init" => {
                dup(initial.is_some())?;
                let ids = toks[1..]
                    .iter()
                    .map(|t| parse_num(no, t))
                    .collect::<Result<_>>()?;
                initial = Some((no, ids));
            }
            "accept" => {
                dup(accepting.is_some())?;
                let ids = toks[1..]
                    .iter()
                    .map(|t| parse_num(no, t))
                    .collect::<Result<_>>()?;
                accepting = Some((no, ids));
            }
            _ => {
                if toks.len() != 3 {
                    return Err(Error::syntax(no, "expected `<src> <symbol> <dst>`"));
                }
                let src = parse_num(no, toks[0])?;
                let dst = parse_num(no, toks[2])?;
                transitions.push((no, src, toks[1].to_string(), dst));
            }
        }
    }

    let n = num_states.ok_or_else(|| Error::syntax(0, "missing `states` line"))?;
    let alphabet = alphabet.ok_or_else(|| Error::syntax(0, "missing `alphabet` line"))?;
    let (init_line, initial) = initial.ok_or_else(|| Error::syntax(0, "missing `init` line"))?;
    let (acc_line, accepting) = accepting.unwrap_or((0, Vec::new()));

    let check = |line: usize, q: u32| -> Result<()> {
        if q as usize >= n {
            Err(Error::syntax(
                line,
                format!("state {q} out of range for {n} states"),
            ))
        } else {
            Ok(())
        }
    };
    if initial.is_empty() {
        return Err(Error::syntax(init_line, "`init` needs at least one state"));
    }
    for &q in &initial {
        check(init_line, q)?;
    }
    for &q in &accepting {
        check(acc_line, q)?;
    }
    let mut aut = BuchiAutomaton::with_alphabet(n, alphabet)?;
    for (line, src, sym, dst) in transitions {
        check(line, src)?;
        check(line, dst)?;
        let sym = aut
            .symbol_index(&sym)
            .map_err(|_| Error::syntax(line, format!("symbol `{sym}` is not in the alphabet")))?;
        aut.add_transition(StateId(src), sym, StateId(dst))?;
    }
    aut.initial = state_set(initial);
    aut.accepting = state_set(accepting);
    Ok(aut)
}

impl FromStr for BuchiAutomaton {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_nba(s)
    }
}

/// Non-empty lines with comments stripped, paired with their 1-based number.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let toks: Vec<&str> = line.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub(crate) fn parse_num(line: usize, tok: &str) -> Result<u32> {
    tok.parse().map_err(|_| {
        Error::syntax(
            line,
            format!("expected a non-negative integer, got `{tok}`"),
        )
    })
}

/// An ultimately periodic word `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lasso {
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

impl Lasso {
    pub fn new(stem: Vec<String>, cycle: Vec<String>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidLasso("cycle must be non-empty".into()));
        }
        Ok(Lasso { stem, cycle })
    }

    /// Resolves the symbols against an alphabet.
    pub fn to_indices(&self, alphabet: &[String]) -> Result<(Vec<usize>, Vec<usize>)> {
        let resolve = |toks: &[String]| -> Result<Vec<usize>> {
            toks.iter()
                .map(|t| {
                    alphabet
                        .iter()
                        .position(|a| a == t)
                        .ok_or_else(|| Error::UnknownSymbol(t.clone()))
                })
                .collect()
        };
        Ok((resolve(&self.stem)?, resolve(&self.cycle)?))
    }

    /// Symbol at word position `i` of `stem · cycle^ω`.
    pub fn symbol_at(&self, i: usize) -> &str {
        if i < self.stem.len() {
            &self.stem[i]
        } else {
            &self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }
}

/// Renders as `a a | b a`; an empty stem renders as `| b a`.
impl fmt::Display for Lasso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.stem.is_empty() {
            write!(f, "{} ", self.stem.join(" "))?;
        }
        write!(f, "| {}", self.cycle.join(" "))
    }
}

impl FromStr for Lasso {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (stem, cycle) = s
            .split_once('|')
            .ok_or_else(|| Error::InvalidLasso(format!("missing `|` in `{s}`")))?;
        let words = |part: &str| {
            part.split_whitespace()
                .map(str::to_string)
                .collect::<Vec<_>>()
        };
        if cycle.contains('|') {
            return Err(Error::InvalidLasso(format!("more than one `|` in `{s}`")));
        }
        Lasso::new(words(stem), words(cycle))
    }
}
