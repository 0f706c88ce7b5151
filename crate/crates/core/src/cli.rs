//! Command-line frontend. Exit status 0 means success or agreement, 1 a
//! semantic disagreement or failed check, 2 a usage, I/O or parse error.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::determinize::{
    determinize_with, transition_traced, DeterminizeOptions, MergeStrategy, TransitionTrace,
};
use crate::error::Error;
use crate::nba::{parse_nba, BuchiAutomaton, Lasso};
use crate::oracle::{enumerate_lassos, nba_accepts_lasso, random_corpus, sample_lassos};
use crate::parity::{parse_dpa, ParityAutomaton};
use crate::safra::{safra_to_slice, slice_to_safra};
use crate::slice::{RankTree, RankedSlice};

#[derive(Debug, Parser)]
#[command(
    name = "buchi-det",
    version,
    about = "Büchi to parity determinization over ranked slices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the parity automaton of an .nba file as .dpa.
    Determinize(DeterminizeArgs),
    /// Compare NBA and DPA decisions on lasso words.
    Check(CheckArgs),
    /// Macrostate and edge counts per strategy.
    Stats(StatsArgs),
    /// Convert a slice to its Safra tree and back.
    Roundtrip {
        /// Canonical slice string, e.g. `({1}:2,{0}:1)`.
        slice: String,
    },
    /// Print every pipeline stage along a lasso.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Input .nba file (`-` for stdin).
    #[arg(short, long)]
    pub input: PathBuf,
    /// One of ms, safra, max, adaptive.
    #[arg(long, default_value = "safra")]
    pub strategy: MergeStrategy,
    /// Maximum number of macrostates.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct DeterminizeArgs {
    #[command(flatten)]
    pub build: BuildArgs,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Emit a `label` line with the slice of every state.
    #[arg(long)]
    pub labels: bool,
    /// Renumber priorities onto the smallest equivalent range.
    #[arg(long)]
    pub compact: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub build: BuildArgs,
    /// Check this .dpa file instead of determinizing.
    #[arg(long)]
    pub dpa: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub max_u: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_v: u64,
    /// Check this many seeded random lassos instead of all of them.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Input .nba file; required unless `--corpus` is given.
    #[arg(short, long, required_unless_present = "corpus")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    /// Summarize a seeded random corpus of this many automata instead.
    #[arg(long, conflicts_with = "input")]
    pub corpus: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub max_states: usize,
    #[arg(long, default_value_t = 2)]
    pub max_alphabet: usize,
    #[arg(long, default_value_t = 0.4)]
    pub density: f64,
    #[arg(long, default_value_t = 0.4)]
    pub accepting: f64,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub build: BuildArgs,
    /// Lasso such as `a a | b`.
    #[arg(long, allow_hyphen_values = true)]
    pub lasso: String,
    /// Start from this slice instead of the initial macrostate.
    #[arg(long)]
    pub from: Option<String>,
}

/// Failure of a command, mapped onto an exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CapacityExceeded { .. } | Error::Invariant(_) | Error::MissingEdge { .. } => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Determinize(a) => cmd_determinize(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Roundtrip { slice } => cmd_roundtrip(&slice, out),
        Command::Trace(a) => cmd_trace(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_nba(path: &Path) -> std::result::Result<BuchiAutomaton, Failure> {
    let text = read_input(path)?;
    parse_nba(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn build(b: &BuildArgs, aut: &BuchiAutomaton) -> std::result::Result<ParityAutomaton, Failure> {
    let opts = DeterminizeOptions {
        cap: b.cap,
        ..Default::default()
    };
    Ok(determinize_with(aut, b.strategy, &opts)?)
}

fn cmd_determinize(a: DeterminizeArgs, out: &mut dyn Write) -> CmdResult {
    let aut = load_nba(&a.build.input)?;
    let opts = DeterminizeOptions {
        cap: a.build.cap,
        compact_priorities: a.compact,
        ..Default::default()
    };
    let mut dpa = determinize_with(&aut, a.build.strategy, &opts)?;
    if !a.labels {
        dpa = dpa.without_labels();
    }
    let text = dpa.to_dpa_string();
    match &a.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn thread_count(requested: Option<usize>) -> usize {
    requested
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Applies `f` to every item on `threads` workers; results keep input order.
fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if threads <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> CmdResult {
    let aut = load_nba(&a.build.input)?;
    let dpa = match &a.dpa {
        Some(path) => {
            let text = read_input(path)?;
            let dpa =
                parse_dpa(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            if dpa.alphabet() != aut.alphabet() {
                return Err(Error::AlphabetMismatch(format!(
                    "nba has [{}], dpa has [{}]",
                    aut.alphabet().join(" "),
                    dpa.alphabet().join(" ")
                ))
                .into());
            }
            dpa
        }
        None => build(&a.build, &aut)?,
    };
    let lassos = match a.random {
        Some(n) => sample_lassos(aut.alphabet(), a.max_u, a.max_v as usize, n, a.seed),
        None => enumerate_lassos(aut.alphabet(), a.max_u, a.max_v as usize),
    };
    let results = par_map(&lassos, thread_count(a.threads), |l| {
        let nba = nba_accepts_lasso(&aut, l)?;
        let run = dpa.run_lasso(l)?;
        Ok::<_, Error>((nba, run))
    });
    for (lasso, r) in lassos.iter().zip(results) {
        let (nba, run) = r?;
        if nba.accepted != run.accepted {
            let verdict = |b: bool| if b { "accept" } else { "reject" };
            writeln!(
                out,
                "disagreement on `{lasso}`: nba {}, dpa {}",
                verdict(nba.accepted),
                verdict(run.accepted)
            )?;
            if let Some(w) = &nba.witness {
                writeln!(out, "  nba witness run: {w}")?;
            }
            let states: Vec<String> = run.cycle_states.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "  dpa cycle states: {} (min priority {})",
                states.join(" "),
                run.min_priority
            )?;
            return Ok(1);
        }
    }
    writeln!(out, "{} lassos checked, no disagreement", lassos.len())?;
    Ok(0)
}

fn stats_row(
    aut: &BuchiAutomaton,
    strategy: MergeStrategy,
    cap: usize,
) -> std::result::Result<(usize, usize), Error> {
    let opts = DeterminizeOptions {
        cap,
        ..Default::default()
    };
    determinize_with(aut, strategy, &opts).map(|d| (d.num_states(), d.num_edges()))
}

fn cmd_stats(a: StatsArgs, out: &mut dyn Write) -> CmdResult {
    let threads = thread_count(a.threads);
    if let Some(path) = &a.input {
        let aut = load_nba(path)?;
        let rows = par_map(&MergeStrategy::ALL, threads, |&s| stats_row(&aut, s, a.cap));
        writeln!(out, "{:<10} {:>8} {:>8}", "strategy", "states", "edges")?;
        for (s, r) in MergeStrategy::ALL.iter().zip(rows) {
            match r {
                Ok((n, e)) => writeln!(out, "{:<10} {n:>8} {e:>8}", s.to_string())?,
                Err(e) => writeln!(out, "{:<10} {e}", s.to_string())?,
            }
        }
        return Ok(0);
    }
    let count = a.corpus.expect("clap enforces input or corpus");
    if !(0.0..=1.0).contains(&a.density)
        || !(0.0..=1.0).contains(&a.accepting)
        || a.max_states == 0
        || a.max_alphabet == 0
    {
        return Err(Failure::Usage("corpus parameters out of range".into()));
    }
    let corpus = random_corpus(
        count,
        a.max_states,
        a.max_alphabet,
        a.density,
        a.accepting,
        a.seed,
    );
    let rows = par_map(&corpus, threads, |aut| {
        MergeStrategy::ALL.map(|s| stats_row(aut, s, a.cap).ok())
    });
    writeln!(
        out,
        "{:<10} {:>10} {:>10} {:>8}",
        "strategy", "states", "edges", "capped"
    )?;
    for (i, s) in MergeStrategy::ALL.iter().enumerate() {
        let ok: Vec<(usize, usize)> = rows.iter().filter_map(|r| r[i]).collect();
        let states: usize = ok.iter().map(|r| r.0).sum();
        let edges: usize = ok.iter().map(|r| r.1).sum();
        writeln!(
            out,
            "{:<10} {states:>10} {edges:>10} {:>8}",
            s.to_string(),
            rows.len() - ok.len()
        )?;
    }
    let both: Vec<(usize, usize)> = rows
        .iter()
        .filter_map(|r| Some((r[0]?.0, r[2]?.0)))
        .collect();
    let smaller = both.iter().filter(|(ms, max)| max <= ms).count();
    writeln!(out, "max <= ms on {smaller} of {} automata", both.len())?;
    Ok(0)
}

fn cmd_roundtrip(text: &str, out: &mut dyn Write) -> CmdResult {
    let slice: RankedSlice = text.parse()?;
    let tree = slice_to_safra(&slice)?;
    write!(out, "{}", tree.pretty())?;
    let back = safra_to_slice(&tree);
    writeln!(out, "{back}")?;
    if back == slice {
        Ok(0)
    } else {
        writeln!(out, "round trip changed the slice")?;
        Ok(1)
    }
}

fn write_trace(out: &mut dyn Write, t: &TransitionTrace) -> io::Result<()> {
    let o = &t.outcome;
    let ranks = |s: &std::collections::BTreeSet<u32>| {
        let v: Vec<String> = s.iter().map(u32::to_string).collect();
        format!("{{{}}}", v.join(","))
    };
    writeln!(out, "  step      {}", t.stepped)?;
    writeln!(out, "  prune     {}", t.pruned)?;
    writeln!(
        out,
        "  G={} R={} k={} priority={}",
        ranks(&o.green),
        ranks(&o.red),
        o.dominating,
        o.priority
    )?;
    writeln!(out, "  partition {}", t.partition)?;
    writeln!(out, "  merge     {}", t.merged)?;
    writeln!(out, "  normalize {}", o.successor)?;
    Ok(())
}

fn cmd_trace(a: TraceArgs, out: &mut dyn Write) -> CmdResult {
    let aut = load_nba(&a.build.input)?;
    let lasso: Lasso = a.lasso.parse()?;
    let (stem, cycle) = lasso.to_indices(aut.alphabet())?;
    let mut current = match &a.from {
        Some(s) => {
            let slice: RankedSlice = s.parse()?;
            if let Some(q) = slice
                .states()
                .iter()
                .find(|q| q.index() >= aut.num_states())
            {
                return Err(Failure::Usage(format!("state {q} is not in the automaton")));
            }
            slice
        }
        None => RankedSlice::initial(aut.initial()),
    };
    let dpa = build(&a.build, &aut)?;
    // adaptive reuse is resolved against the finished automaton
    let known: HashSet<RankedSlice> = (0..dpa.num_states())
        .filter_map(|s| dpa.label(s)?.parse().ok())
        .collect();
    let limits = DeterminizeOptions::default().limits;
    writeln!(out, "start {current}")?;
    for (i, &sym) in stem.iter().chain(&cycle).enumerate() {
        writeln!(
            out,
            "symbol {} `{}` from {current}",
            i + 1,
            aut.alphabet()[sym]
        )?;
        if current.is_sink() {
            writeln!(out, "  sink: no run survives, priority=1")?;
            continue;
        }
        let t = transition_traced(
            &aut,
            &current,
            sym,
            a.build.strategy,
            &|s| known.contains(s),
            limits,
        )?;
        write_trace(out, &t)?;
        if t.outcome.successor.is_sink() {
            writeln!(out, "  sink reached")?;
        }
        current = t.outcome.successor;
    }
    let run = dpa.run_lasso(&lasso)?;
    let nba = nba_accepts_lasso(&aut, &lasso)?;
    let verdict = |b: bool| if b { "accept" } else { "reject" };
    writeln!(
        out,
        "verdict: dpa {} (min cycle priority {}), nba {}",
        verdict(run.accepted),
        run.min_priority,
        verdict(nba.accepted)
    )?;
    Ok(if run.accepted == nba.accepted { 0 } else { 1 })
}
