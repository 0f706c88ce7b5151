//! Transition-based deterministic parity automata with the min-even
//! acceptance condition, plus the `.dpa` text format.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::nba::{content_lines, parse_num, Lasso};
use crate::slice::RankedSlice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub target: usize,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityAutomaton {
    alphabet: Vec<String>,
    initial: usize,
    edges: Vec<Vec<Option<Edge>>>,
    labels: Vec<Option<String>>,
}

/// Outcome of running a lasso, with the repeating part of the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoRun {
    pub accepted: bool,
    /// States visited along one traversal of the repeating segment.
    pub cycle_states: Vec<usize>,
    pub min_priority: u32,
}

impl ParityAutomaton {
    /// `edges[state][symbol]`; `labels` must have one entry per state.
    pub fn new(
        alphabet: Vec<String>,
        initial: usize,
        edges: Vec<Vec<Option<Edge>>>,
        labels: Vec<Option<String>>,
    ) -> Result<Self> {
        let n = edges.len();
        if initial >= n {
            return Err(Error::InvalidAutomaton(format!(
                "initial state {initial} out of range"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidAutomaton(
                "one label slot per state required".into(),
            ));
        }
        for (s, row) in edges.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::InvalidAutomaton(format!(
                    "state {s} has a malformed edge row"
                )));
            }
            for e in row.iter().flatten() {
                if e.target >= n {
                    return Err(Error::InvalidAutomaton(format!(
                        "edge from {s} to missing state {}",
                        e.target
                    )));
                }
                if e.priority == 0 {
                    return Err(Error::InvalidAutomaton(format!(
                        "state {s} has an edge with priority 0"
                    )));
                }
            }
        }
        Ok(ParityAutomaton {
            alphabet,
            initial,
            edges,
            labels,
        })
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn edge(&self, state: usize, sym: usize) -> Option<Edge> {
        self.edges.get(state)?.get(sym).copied().flatten()
    }

    pub fn label(&self, state: usize) -> Option<&str> {
        self.labels.get(state)?.as_deref()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().flatten().flatten().count()
    }

    pub fn without_labels(&self) -> Self {
        ParityAutomaton {
            labels: vec![None; self.num_states()],
            ..self.clone()
        }
    }

    fn step(&self, state: usize, sym: usize) -> Result<Edge> {
        self.edge(state, sym).ok_or_else(|| Error::MissingEdge {
            state,
            symbol: self.alphabet[sym].clone(),
        })
    }

    /// Runs `stem · cycle^ω` given as symbol indices.
    pub fn run_indices(&self, stem: &[usize], cycle: &[usize]) -> Result<LassoRun> {
        if cycle.is_empty() {
            return Err(Error::InvalidLasso("cycle must be non-empty".into()));
        }
        let mut state = self.initial;
        for &sym in stem {
            state = self.step(state, sym)?.target;
        }
        // boundary state -> index of the pass starting there
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut passes: Vec<(Vec<usize>, u32)> = Vec::new();
        loop {
            if let Some(&first) = seen.get(&state) {
                let repeating = &passes[first..];
                let min_priority = repeating
                    .iter()
                    .map(|p| p.1)
                    .min()
                    .expect("non-empty cycle");
                let cycle_states = repeating.iter().flat_map(|p| p.0.iter().copied()).collect();
                return Ok(LassoRun {
                    accepted: min_priority % 2 == 0,
                    cycle_states,
                    min_priority,
                });
            }
            seen.insert(state, passes.len());
            let mut visited = Vec::with_capacity(cycle.len());
            let mut min = u32::MAX;
            for &sym in cycle {
                visited.push(state);
                let e = self.step(state, sym)?;
                min = min.min(e.priority);
                state = e.target;
            }
            passes.push((visited, min));
        }
    }

    pub fn run_lasso(&self, lasso: &Lasso) -> Result<LassoRun> {
        let (stem, cycle) = lasso.to_indices(&self.alphabet)?;
        self.run_indices(&stem, &cycle)
    }

    pub fn accepts(&self, lasso: &Lasso) -> Result<bool> {
        self.run_lasso(lasso).map(|r| r.accepted)
    }

    /// Remaps priorities onto the smallest values with the same order and
    /// parity pattern; acceptance is unchanged.
    pub fn compact_priorities(&self) -> Self {
        let mut used: Vec<u32> = self
            .edges
            .iter()
            .flatten()
            .flatten()
            .map(|e| e.priority)
            .collect();
        used.sort_unstable();
        used.dedup();
        let mut map = BTreeMap::new();
        let mut prev: Option<(u32, u32)> = None;
        for p in used {
            let v = match prev {
                None => 2 - p % 2,
                Some((q, v)) if q % 2 == p % 2 => v,
                Some((_, v)) => v + 1,
            };
            map.insert(p, v);
            prev = Some((p, v));
        }
        let mut out = self.clone();
        for e in out.edges.iter_mut().flatten().flatten() {
            e.priority = map[&e.priority];
        }
        out
    }

    /// Canonical `.dpa` text.
    pub fn to_dpa_string(&self) -> String {
        let mut out = String::new();
        writeln!(out, "dpa").unwrap();
        writeln!(out, "states {}", self.num_states()).unwrap();
        writeln!(out, "alphabet {}", self.alphabet.join(" ")).unwrap();
        writeln!(out, "init {}", self.initial).unwrap();
        for (s, label) in self.labels.iter().enumerate() {
            if let Some(l) = label {
                writeln!(out, "label {s} {l}").unwrap();
            }
        }
        for (s, row) in self.edges.iter().enumerate() {
            for (sym, e) in row.iter().enumerate() {
                if let Some(e) = e {
                    writeln!(
                        out,
                        "{s} {} {} {}",
                        self.alphabet[sym], e.target, e.priority
                    )
                    .unwrap();
                }
            }
        }
        out
    }
}

impl FromStr for ParityAutomaton {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_dpa(s)
    }
}

pub fn parse_dpa(text: &str) -> Result<ParityAutomaton> {
    let mut lines = content_lines(text).peekable();
    match lines.next() {
        Some((_, toks)) if toks == ["dpa"] => {}
        Some((l, _)) => return Err(Error::syntax(l, "expected `dpa` header")),
        None => return Err(Error::syntax(1, "empty input")),
    }
    let mut states = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut init = None;
    while let Some((l, toks)) = lines.peek() {
        let l = *l;
        match toks[0] {
            "states" | "alphabet" | "init" => {}
            _ => break,
        }
        let (_, toks) = lines.next().unwrap();
        match toks[0] {
            "states" if states.is_none() => {
                if toks.len() != 2 {
                    return Err(Error::syntax(l, "expected `states <n>`"));
                }
                states = Some(parse_num(l, toks[1])? as usize);
            }
            "alphabet" if alphabet.is_none() => {
                let syms: Vec<String> = toks[1..].iter().map(|t| t.to_string()).collect();
                for (i, a) in syms.iter().enumerate() {
                    if syms[..i].contains(a) {
                        return Err(Error::syntax(l, format!("duplicate symbol `{a}`")));
                    }
                }
                alphabet = Some(syms);
            }
            "init" if init.is_none() => {
                if toks.len() != 2 {
                    return Err(Error::syntax(l, "expected `init <id>`"));
                }
                init = Some(parse_num(l, toks[1])? as usize);
            }
            other => return Err(Error::syntax(l, format!("duplicate `{other}` line"))),
        }
    }
    let n = states.ok_or_else(|| Error::syntax(1, "missing `states` line"))?;
    let alphabet = alphabet.ok_or_else(|| Error::syntax(1, "missing `alphabet` line"))?;
    let init = init.ok_or_else(|| Error::syntax(1, "missing `init` line"))?;
    if init >= n {
        return Err(Error::InvalidAutomaton(format!(
            "initial state {init} out of range"
        )));
    }
    let mut edges = vec![vec![None; alphabet.len()]; n];
    let mut labels = vec![None; n];
    let state = |l: usize, tok: &str| -> Result<usize> {
        let s = parse_num(l, tok)? as usize;
        if s >= n {
            return Err(Error::syntax(l, format!("state {s} out of range")));
        }
        Ok(s)
    };
    for (l, toks) in lines {
        if toks[0] == "label" {
            if toks.len() < 3 {
                return Err(Error::syntax(l, "expected `label <id> <slice>`"));
            }
            let s = state(l, toks[1])?;
            let text = toks[2..].join(" ");
            let slice: RankedSlice = text
                .parse()
                .map_err(|e| Error::syntax(l, format!("bad label: {e}")))?;
            if labels[s].replace(slice.to_string()).is_some() {
                return Err(Error::syntax(l, format!("state {s} labelled twice")));
            }
            continue;
        }
        if toks.len() != 4 {
            return Err(Error::syntax(
                l,
                "expected `<src> <symbol> <dst> <priority>`",
            ));
        }
        let src = state(l, toks[0])?;
        let sym = alphabet
            .iter()
            .position(|a| a == toks[1])
            .ok_or_else(|| Error::syntax(l, format!("unknown symbol `{}`", toks[1])))?;
        let target = state(l, toks[2])?;
        let priority = parse_num(l, toks[3])?;
        if priority == 0 {
            return Err(Error::syntax(l, "priorities start at 1"));
        }
        let slot: &mut Option<Edge> = &mut edges[src][sym];
        if slot.is_some() {
            return Err(Error::syntax(
                l,
                format!("second edge from {src} on `{}`", toks[1]),
            ));
        }
        *slot = Some(Edge { target, priority });
    }
    ParityAutomaton::new(alphabet, init, edges, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(s: &str) -> Lasso {
        s.parse().unwrap()
    }

    fn one_state(prios: &[u32]) -> ParityAutomaton {
        let alphabet = (0..prios.len())
            .map(|i| ((b'a' + i as u8) as char).to_string())
            .collect();
        let row = prios
            .iter()
            .map(|&p| {
                Some(Edge {
                    target: 0,
                    priority: p,
                })
            })
            .collect();
        ParityAutomaton::new(alphabet, 0, vec![row], vec![None]).unwrap()
    }

    // 0 -a/1-> 1 -a/4-> 2 -a/4-> 2, 2 -b/3-> 1, others to 0 with priority 5
    const SMALL: &str = "dpa\nstates 3\nalphabet a b\ninit 0\n\
        label 0 ({0}:1)\n\
        0 a 1 1\n0 b 0 5\n1 a 2 4\n1 b 0 5\n2 a 2 4\n2 b 1 3\n";

    #[test]
    fn all_even_file_shape() {
        let text = one_state(&[2, 2]).to_dpa_string();
        assert_eq!(
            text,
            "dpa\nstates 1\nalphabet a b\ninit 0\n0 a 0 2\n0 b 0 2\n"
        );
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn round_trip() {
        let dpa = parse_dpa(SMALL).unwrap();
        assert_eq!(dpa.to_dpa_string(), SMALL);
        assert_eq!(dpa.label(0), Some("({0}:1)"));
        assert_eq!(dpa.label(1), None);
        assert_eq!(parse_dpa(&dpa.to_dpa_string()).unwrap(), dpa);
        assert!(!dpa.without_labels().to_dpa_string().contains("label"));
    }

    #[test]
    fn runs() {
        let dpa = parse_dpa(SMALL).unwrap();
        let r = dpa.run_lasso(&lasso("| a")).unwrap();
        assert!(r.accepted);
        assert_eq!(r.min_priority, 4);
        assert_eq!(r.cycle_states, vec![2]);
        let r = dpa.run_lasso(&lasso("a a | b a")).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.min_priority, 3);
        assert!(!dpa.accepts(&lasso("| b")).unwrap());
        assert!(matches!(
            dpa.run_lasso(&lasso("| c")),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn sink_rejects() {
        let sink = one_state(&[1, 1]);
        for l in ["| a", "a b | b a", "b | a b b"] {
            let r = sink.run_lasso(&lasso(l)).unwrap();
            assert!(!r.accepted);
            assert_eq!(r.min_priority, 1);
        }
    }

    #[test]
    fn unrolling_and_doubling_invariance() {
        let dpa = parse_dpa(SMALL).unwrap();
        let words = ["a", "b", "ab", "ba", "aab", "abb"];
        for u in ["", "a", "b a"] {
            for v in words {
                let v: Vec<&str> = v.split("").filter(|s| !s.is_empty()).collect();
                let base = format!("{u} | {}", v.join(" "));
                let unrolled = format!("{u} {} | {}", v.join(" "), v.join(" "));
                let doubled = format!("{u} | {} {}", v.join(" "), v.join(" "));
                let a = dpa.accepts(&lasso(&base)).unwrap();
                assert_eq!(a, dpa.accepts(&lasso(&unrolled)).unwrap());
                assert_eq!(a, dpa.accepts(&lasso(&doubled)).unwrap());
            }
        }
    }

    #[test]
    fn missing_edge() {
        let dpa = parse_dpa("dpa\nstates 2\nalphabet a\ninit 0\n0 a 1 2\n").unwrap();
        assert_eq!(
            dpa.run_lasso(&lasso("| a")),
            Err(Error::MissingEdge {
                state: 1,
                symbol: "a".into()
            })
        );
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("states 1\n", 1),
            ("dpa\nstates 1\nalphabet a\ninit 0\n0 a 1 2\n", 5),
            ("dpa\nstates 1\nalphabet a\ninit 0\n0 a 0 0\n", 5),
            ("dpa\nstates 1\nalphabet a\ninit 0\n0 a 0 2\n0 a 0 2\n", 6),
            ("dpa\nstates 1\nalphabet a\ninit 0\nlabel 0 ({0}:2)\n", 5),
            ("dpa\nstates 1\nstates 1\n", 3),
            ("dpa\nstates 1\nalphabet a\ninit 0\n0 z 0 2\n", 5),
        ];
        for (text, line) in cases {
            match parse_dpa(text) {
                Err(Error::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(parse_dpa("dpa\nstates 1\nalphabet a\ninit 3\n").is_err());
    }

    #[test]
    fn compaction_keeps_parity_pattern() {
        let dpa =
            parse_dpa("dpa\nstates 2\nalphabet a b\ninit 0\n0 a 1 3\n0 b 0 5\n1 a 1 8\n1 b 0 9\n")
                .unwrap();
        let c = dpa.compact_priorities();
        let prios: Vec<u32> = (0..2)
            .flat_map(|s| (0..2).map(move |x| (s, x)))
            .map(|(s, x)| c.edge(s, x).unwrap().priority)
            .collect();
        assert_eq!(prios, vec![1, 1, 2, 3]);
        for l in ["| a", "| b", "| a b", "a | a", "| a a b"] {
            assert_eq!(
                dpa.accepts(&lasso(l)).unwrap(),
                c.accepts(&lasso(l)).unwrap()
            );
        }
        assert_eq!(one_state(&[4, 6]).compact_priorities(), one_state(&[2, 2]));
    }
}
