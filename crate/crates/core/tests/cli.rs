use std::path::PathBuf;
use std::process::Command;

use buchi_det::cli::run;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["buchi-det"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("buchi-det-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn determinize_matches_golden_file() {
    let (code, out, _) = call(&[
        "determinize",
        "-i",
        &data("three_state.nba"),
        "--strategy",
        "ms",
        "--labels",
    ]);
    assert_eq!(code, 0);
    let golden = std::fs::read_to_string(data("three_state.ms.dpa")).unwrap();
    assert_eq!(out, golden);
    assert_eq!(out.lines().filter(|l| l.starts_with("label")).count(), 3);
}

#[test]
fn determinize_without_labels_and_to_file() {
    let path = scratch("out.dpa");
    let (code, out, _) = call(&[
        "determinize",
        "-i",
        &data("three_state.nba"),
        "--strategy",
        "ms",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("dpa\nstates 3\n"));
    assert!(!text.contains("label"));
}

#[test]
fn compact_priorities_flag() {
    let (code, out, _) = call(&[
        "determinize",
        "-i",
        &data("three_state.nba"),
        "--strategy",
        "ms",
        "--compact",
    ]);
    assert_eq!(code, 0);
    assert!(
        out.contains("0 a 1 3\n") && out.contains("2 a 2 2\n"),
        "{out}"
    );
}

#[test]
fn unknown_strategy_is_a_usage_error() {
    let (code, _, err) = call(&[
        "determinize",
        "-i",
        &data("three_state.nba"),
        "--strategy",
        "fast",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown strategy"));
}

#[test]
fn missing_and_malformed_inputs() {
    let (code, _, err) = call(&["determinize", "-i", "/nonexistent/file.nba"]);
    assert_eq!(code, 2);
    assert!(err.contains("/nonexistent/file.nba"));
    let bad = scratch("bad.nba");
    std::fs::write(&bad, "nba\nstates 2\nalphabet a\ninit 0\n0 a 5\n").unwrap();
    let (code, _, err) = call(&["determinize", "-i", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn capacity_exceeded_exits_nonzero() {
    let (code, _, err) = call(&[
        "determinize",
        "-i",
        &data("three_state.nba"),
        "--strategy",
        "ms",
        "--cap",
        "2",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("cap"));
}

#[test]
fn check_agrees_on_own_output() {
    for s in ["ms", "safra", "max", "adaptive"] {
        let (code, out, _) = call(&["check", "-i", &data("six_state.nba"), "--strategy", s]);
        assert_eq!(code, 0, "{s}: {out}");
    }
    let (code, out, _) = call(&[
        "check",
        "-i",
        &data("three_state.nba"),
        "--dpa",
        &data("three_state.ms.dpa"),
        "--max-u",
        "3",
        "--max-v",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "12 lassos checked, no disagreement\n");
}

#[test]
fn check_reports_corrupted_priority() {
    let golden = std::fs::read_to_string(data("three_state.ms.dpa")).unwrap();
    let corrupted = golden.replace("2 a 2 4", "2 a 2 5");
    assert_ne!(corrupted, golden);
    let path = scratch("corrupt.dpa");
    std::fs::write(&path, corrupted).unwrap();
    let (code, out, _) = call(&[
        "check",
        "-i",
        &data("three_state.nba"),
        "--dpa",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    let first = out.lines().next().unwrap();
    assert_eq!(first, "disagreement on `| a`: nba accept, dpa reject");
    assert!(out.contains("nba witness run: q0 (q1)^ω"));
    assert!(out.contains("min priority 5"));
}

#[test]
fn check_alphabet_mismatch() {
    let path = scratch("other.dpa");
    std::fs::write(&path, "dpa\nstates 1\nalphabet b\ninit 0\n0 b 0 1\n").unwrap();
    let (code, _, err) = call(&[
        "check",
        "-i",
        &data("three_state.nba"),
        "--dpa",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("alphabet mismatch"));
}

#[test]
fn random_check_is_reproducible() {
    let args = [
        "check",
        "-i",
        &data("six_state.nba"),
        "--random",
        "1000",
        "--seed",
        "7",
        "--threads",
        "3",
    ];
    let a = call(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, "1000 lassos checked, no disagreement\n");
    assert_eq!(a, call(&args));
}

#[test]
fn zero_cycle_bound_rejected() {
    let (code, _, _) = call(&["check", "-i", &data("three_state.nba"), "--max-v", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn stats_table() {
    let (code, out, _) = call(&["stats", "-i", &data("three_state.nba")]);
    assert_eq!(code, 0);
    let counts: Vec<(String, usize)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f[1].parse().unwrap())
        })
        .collect();
    // the green event on rank 2 lets safra and max merge {q1} into {q2}'s node
    let expected = [("ms", 3), ("safra", 4), ("max", 4), ("adaptive", 3)];
    assert_eq!(counts, expected.map(|(s, n)| (s.to_string(), n)));
}

#[test]
fn stats_dead_automaton_has_sink() {
    let path = scratch("dead.nba");
    std::fs::write(&path, "nba\nstates 2\nalphabet a b\ninit 0\naccept 1\n").unwrap();
    let (code, out, _) = call(&["stats", "-i", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    for line in out.lines().skip(1) {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f[1], "2", "{line}");
    }
}

#[test]
fn stats_corpus_summary() {
    let args = ["stats", "--corpus", "20", "--seed", "3"];
    let (code, out, _) = call(&args);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 6);
    assert!(out.lines().last().unwrap().ends_with("of 20 automata"));
    assert_eq!(out, call(&args).1);
    assert_eq!(call(&["stats"]).0, 2);
}

#[test]
fn roundtrip_command() {
    let (code, out, _) = call(&["roundtrip", "({3}:4,{1}:2,{2}:3,{0}:1)"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "{0}:1\n  {1}:2\n    {3}:4\n  {2}:3\n({3}:4,{1}:2,{2}:3,{0}:1)\n"
    );
    let (code, out, _) = call(&["roundtrip", "({0}:1)"]);
    assert_eq!((code, out.as_str()), (0, "{0}:1\n({0}:1)\n"));
    assert_eq!(call(&["roundtrip", "({0}:2,{1}:1)"]).0, 0);
    let (code, _, err) = call(&["roundtrip", "({0}:1,{1}:2)"]);
    assert_eq!(code, 2);
    assert!(err.contains("rank 1"));
    assert_eq!(call(&["roundtrip", "({0}:1"]).0, 2);
}

#[test]
fn trace_six_state_step() {
    let (code, out, _) = call(&[
        "trace",
        "-i",
        &data("six_state.nba"),
        "--lasso",
        "| x",
        "--from",
        "({2}:3,{3}:5,{1}:2,{5}:6,{4}:4,{0}:1)",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("  prune     ({2}:7,{1}:3,{3}:2,{5}:6,{4}:4,{0}:1)\n"));
    assert!(out.contains("  G={2,6} R={5} k=2 priority=4\n"));
    assert!(out.contains("  normalize ({1,2,3}:2,{5}:4,{4}:3,{0}:1)\n"));
    assert!(out.ends_with("verdict: dpa accept (min cycle priority 4), nba accept\n"));
}

#[test]
fn trace_four_state_step_from_given_slice() {
    let (code, out, _) = call(&[
        "trace",
        "-i",
        &data("four_state.nba"),
        "--lasso",
        "| a",
        "--from",
        "({1}:2,{2}:3,{0}:1)",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("  G={3} R={2} k=2 priority=3\n"), "{out}");
    assert!(out.contains("  normalize ({2}:2,{3}:3,{0}:1)\n"));
}

#[test]
fn four_state_slice_is_not_reachable() {
    // the slice only serves as a starting point; from ({0}:1) the
    // automaton first reaches ({2,3}:2,{0}:1)
    let (code, out, _) = call(&["determinize", "-i", &data("four_state.nba"), "--labels"]);
    assert_eq!(code, 0);
    assert!(out.contains("label 1 ({2,3}:2,{0}:1)\n"));
    assert!(!out.contains("({1}:2,{2}:3,{0}:1)"));
}

#[test]
fn trace_into_sink() {
    let path = scratch("dying.nba");
    std::fs::write(
        &path,
        "nba\nstates 2\nalphabet a b\ninit 0\naccept 1\n0 a 1\n",
    )
    .unwrap();
    let (code, out, _) = call(&["trace", "-i", path.to_str().unwrap(), "--lasso", "a | b"]);
    assert_eq!(code, 0);
    assert!(out.contains("symbol 2 `b` from ({1}:1)\n"));
    assert!(out.contains("k=1 priority=1"));
    assert!(out.contains("  sink reached\n"));
    assert!(out.ends_with("verdict: dpa reject (min cycle priority 1), nba reject\n"));
}

#[test]
fn trace_bad_lasso() {
    let (code, _, err) = call(&["trace", "-i", &data("three_state.nba"), "--lasso", "a b"]);
    assert_eq!(code, 2);
    assert!(err.contains("lasso"));
    let (code, _, _) = call(&["trace", "-i", &data("three_state.nba"), "--lasso", "| z"]);
    assert_eq!(code, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_buchi-det");
    let ok = Command::new(bin)
        .args(["roundtrip", "({1}:2,{0}:1)"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&ok.stdout),
        "{0}:1\n  {1}:2\n({1}:2,{0}:1)\n"
    );
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("determinize"));
}
