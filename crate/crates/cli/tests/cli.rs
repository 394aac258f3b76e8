use std::path::{Path, PathBuf};
use std::process::Command as Proc;

use bratteli_cli::{run, run_to, Cli};
use bratteli_core::io::{parse_report, ReportLine};
use clap::Parser;

fn cli(args: &[&str]) -> Cli {
    let mut full = vec!["bratteli"];
    full.extend_from_slice(args);
    Cli::try_parse_from(full).unwrap()
}

fn output(args: &[&str]) -> (i32, String) {
    let mut buf = Vec::new();
    let code = run_to(&cli(args), &mut buf).unwrap();
    (code, String::from_utf8(buf).unwrap())
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const POINTS6: &str = "P 0\nP 1\nP 2\nP 3\nP 4\nP 5\n";

fn relation_files(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let r = file(dir, "r.txt", &format!("{POINTS6}C 0 3\nC 1 4\nC 2 5\n"));
    let sr = file(dir, "s.txt", &format!("{POINTS6}C 0 1 2\nC 3 4 5\n"));
    let chain = file(dir, "chain.txt", &format!("{POINTS6}CHAIN 0\nCHAIN 1\nCHAIN 2\nC 0 3\nC 1 4\nC 2 5\n"));
    (r, sr, chain)
}

#[test]
fn demo_matches_the_golden_report() {
    let golden = include_str!("golden/demo_two_point_depth6.txt");
    let (code, out) = output(&["demo", "two-point", "--depth", "6"]);
    assert_eq!(code, 0);
    assert_eq!(out, golden);
    assert!(out.contains("MARGIN 5 6"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [&["demo", "two-point", "--depth", "4"][..], &["verify-star", "@instance/4/3", "--seed", "3"]] {
        assert_eq!(output(args), output(args));
    }
}

#[test]
fn every_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let (r, sr, chain) = relation_files(dir.path());
    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", "@odo2/3"],
        vec!["paths", "@tree2/3"],
        vec!["telescope", "@complete/2/1/4", "--cuts", "0,2,4"],
        vec!["microscope", "@odo2/3", "--level", "2"],
        vec!["capacity", "@simple/8", "--cap-a", "3,3", "--cap-b", "2,2"],
        vec!["simple", "@complete/2/1/3"],
        vec!["rel-join", s(&r), s(&sr)],
        vec!["rel-transversal", s(&r), s(&sr)],
        vec!["rel-filtration", s(&chain), "--s", s(&sr)],
        vec!["build-diagram", s(&chain)],
        vec!["transverse-build", s(&chain), "--s", s(&sr)],
        vec!["plant", "@instance/4/3"],
        vec!["alpha", "@instance/4/3"],
        vec!["verify-star", "@instance/4/3", "--skip", "1"],
    ];
    for args in runs {
        let (_, out) = output(&args);
        let lines = parse_report(&out).unwrap_or_else(|e| panic!("{args:?}: {e}\n{out}"));
        assert!(!lines.is_empty(), "{args:?}");
        assert!(lines.iter().any(|l| matches!(l, ReportLine::Stage { .. })));
    }
}

#[test]
fn thin_passes_exactly_at_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let half: String = (1..=10).map(|n| format!("S {n} a\n")).collect();
    let sub = file(dir.path(), "half.txt", &half);
    let (code, out) = output(&["thin", "@odo2/10", "--sub", s(&sub), "--depth", "10", "--eps", "1/1024"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("bound 1/1024"));
    let (code, _) = output(&["thin", "@odo2/10", "--sub", s(&sub), "--depth", "10", "--eps", "1/1025"]);
    assert_eq!(code, 1);
    // default eps is 2^-20
    let (code, _) = output(&["thin", "@odo2/10", "--sub", s(&sub)]);
    assert_eq!(code, 1);
    let deep: String = (1..=20).map(|n| format!("S {n} a\n")).collect();
    let sub = file(dir.path(), "half20.txt", &deep);
    let (code, out) = output(&["thin", "@odo2/20", "--sub", s(&sub)]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn flags_are_checked_before_inputs_are_read() {
    for args in [
        &["thin", "missing.txt", "--sub", "missing.txt", "--eps", "0.5"][..],
        &["telescope", "missing.txt", "--cuts", "1,2"],
        &["capacity", "missing.txt", "--cap-a", "1,2", "--cap-b", "1"],
        &["verify-star", "@instance/4/3", "--chain", "c.txt", "--s", "s.txt"],
        &["verify-star", "missing.txt", "--depth", "3", "--level", "3", "--chain", "c", "--s", "s"],
        &["demo", "two-point", "--depth", "1"],
    ] {
        let err = run(&cli(args)).unwrap_err().to_string();
        assert!(!err.contains("reading"), "{args:?} read input before failing: {err}");
    }
}

#[test]
fn dot_counts_nodes_and_styles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&cli(&["dot", "@tree2/4"])).unwrap().stdout.unwrap();
    assert_eq!(out.matches(" [label=").count() - out.matches(" -> ").count(), 1 + 2 * 4);
    let all: String = (1..=3).flat_map(|n| if n == 1 { vec!["S 1 l0\n".to_string(), "S 1 l1\n".into()] } else { vec![format!("S {n} c\n")] }).collect();
    let sub = file(dir.path(), "all.txt", &all);
    let out = run(&cli(&["dot", "@loop1/3", "--sub", s(&sub)])).unwrap().stdout.unwrap();
    assert_eq!(out.matches("style=bold").count(), 4);
    assert_eq!(out.matches(" -> ").count(), 4);
}

#[test]
fn demo_dot_has_a_node_per_rewritten_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("bar.txt");
    let (code, _) = output(&["demo", "two-point", "--depth", "4", "--out", s(&d)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&d).unwrap();
    let vertices = text.lines().filter(|l| l.starts_with("V ")).count();
    let dot = run(&cli(&["dot", s(&d)])).unwrap().stdout.unwrap();
    assert_eq!(dot.matches(" [label=").count() - dot.matches(" -> ").count(), vertices);
}

#[test]
fn artifacts_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let (_, sr, chain) = relation_files(dir.path());
    let (d, dp, q) = (dir.path().join("d.txt"), dir.path().join("dp.txt"), dir.path().join("q.txt"));
    let (code, _) = output(&[
        "transverse-build", s(&chain), "--s", s(&sr), "--out", s(&d), "--out-prime", s(&dp), "--out-quotient", s(&q),
    ]);
    assert_eq!(code, 0);
    let (code, out) = output(&["validate", s(&d), "--quotient", s(&q), "--target", s(&dp)]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("STAGE lift PASS 6 paths"));

    let (ab, abq) = (dir.path().join("ab.txt"), dir.path().join("abq.txt"));
    let (code, _) = output(&["absorb", "@instance/4/3", "--out", s(&ab), "--out-quotient", s(&abq)]);
    assert_eq!(code, 0);
    let host = dir.path().join("host.txt");
    std::fs::write(&host, bratteli_core::io::emit_diagram(&bratteli_core::gen::Gen::new(0).absorption_instance(4, 3).unwrap().host)).unwrap();
    let (code, out) = output(&["validate", s(&ab), "--quotient", s(&abq), "--target", s(&host)]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn non_transverse_pairs_fail_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let (r, _, _) = relation_files(dir.path());
    let bad = file(dir.path(), "bad.txt", &format!("{POINTS6}C 0 3 1\n"));
    let (code, out) = output(&["rel-transversal", s(&r), s(&bad)]);
    assert_eq!(code, 1);
    assert!(out.starts_with("STAGE transversal FAIL"), "{out}");
    assert!(out.contains("(0,3)"));
}

#[test]
fn exit_codes_from_the_binary() {
    let bin = env!("CARGO_BIN_EXE_bratteli");
    let status = |args: &[&str]| Proc::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["validate", "@odo2/3"]), Some(0));
    assert_eq!(status(&["simple", "@tree2/3"]), Some(1));
    assert_eq!(status(&["validate", "/nonexistent/file"]), Some(2));
    assert_eq!(status(&["frobnicate"]), Some(2));
}
