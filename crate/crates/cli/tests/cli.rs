use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Duration;

use proptest::prelude::*;

use aspunit_cli::report::{render_report, Format};
use aspunit_cli::runner::{AssertionReport, CaseReport, TestReport};
use aspunit_core::assertions::Status;
use aspunit_core::testlang::Mode;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn aspunit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aspunit"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn text_report_of_clique_suite() {
    let o = aspunit(&["run", "fixtures/clique.aspt", "--solver", "internal"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("4 passed, 0 failed, 0 errors\n"), "{}", stdout(&o));
}

#[test]
fn check_verb() {
    let ok = aspunit(&["check", "fixtures/clique.aspt"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));

    let cycle = aspunit(&["check", "fixtures/cycle.aspt"]);
    assert_eq!(cycle.status.code(), Some(0));
    assert!(stderr(&cycle).contains("warning"));
    assert!(stderr(&cycle).contains("p -> q -> p"), "{}", stderr(&cycle));

    let unknown = aspunit(&["check", "fixtures/unknown_rule.aspt"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(stderr(&unknown).contains("unknown rule name r9"));
}

#[test]
fn missing_input_names_the_path() {
    let o = aspunit(&["run", "fixtures/missing_input.aspt", "--solver", "internal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("no_such_graph.dl"), "{}", stdout(&o));
    let c = aspunit(&["check", "fixtures/missing_input.aspt"]);
    assert_eq!(c.status.code(), Some(2));
    assert!(stderr(&c).contains("no_such_graph.dl"));
}

#[test]
fn missing_suite_file_is_an_error() {
    let o = aspunit(&["run", "fixtures/nope.aspt", "--solver", "internal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("__suite__"));
}

#[test]
fn absent_dlv_is_an_error_not_a_crash() {
    let o = aspunit(&["run", "fixtures/clique.aspt", "--solver-path", "/nonexistent/dlv", "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totals"]["errored"], 4);
    for c in v["cases"].as_array().unwrap() {
        let detail = c["assertions"][0]["detail"].as_str().unwrap();
        assert!(detail.contains("/nonexistent/dlv"), "{detail}");
        let kept = detail.split("program kept at ").nth(1).expect("kept program named");
        std::fs::remove_file(kept).unwrap();
    }
}

#[test]
fn replayed_external_solver_through_the_runner() {
    let stub = root().join("fixtures/stubs/replay_clingo.sh");
    let o = aspunit(&[
        "run",
        "fixtures/clique.aspt",
        "--solver",
        "clingo",
        "--solver-path",
        stub.to_str().unwrap(),
        "--options",
        "--replay=clique_full",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mc = &v["cases"][0];
    assert_eq!(mc["name"], "maximalClique");
    assert_eq!(mc["status"], "pass", "{mc}");
    assert!(mc["transcript"].as_str().unwrap().contains("replay_clingo.sh --replay=clique_full"));
}

#[test]
fn out_file_and_base_dir() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("s.aspt");
    std::fs::write(&suite, "invocation(\"X\");\ninputFile(\"graphInstance.dl\");\nt() { assertTrue(\"node(7).\"); }\n").unwrap();
    let out = dir.path().join("report.xml");
    let fixtures = root().join("fixtures");
    let o = aspunit(&[
        "run",
        suite.to_str().unwrap(),
        "--base-dir",
        fixtures.to_str().unwrap(),
        "--format",
        "junit",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("1 passed, 0 failed, 0 errors"));
    let xml = std::fs::read_to_string(out).unwrap();
    assert!(xml.contains("<testcase name=\"t\""));
}

#[test]
fn solve_verb() {
    let o = aspunit(&["solve", "fixtures/programs/weak_levels.dl"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('{')).count(), 4);
    assert!(text.contains("best cost <[1:1]>"), "{text}");
    let capped = aspunit(&["solve", "fixtures/programs/guess_clique.dl", "--max-models", "5"]);
    assert_eq!(stdout(&capped).lines().filter(|l| l.starts_with('{')).count(), 5);
    assert!(stdout(&capped).contains("stopped after 5"));
}

fn status() -> impl Strategy<Value = Status> {
    prop_oneof![Just(Status::Pass), Just(Status::Fail), Just(Status::Error)]
}

fn case_report() -> impl Strategy<Value = CaseReport> {
    ("[a-z]{1,6}", prop::collection::vec(status(), 0..4)).prop_map(|(name, statuses)| CaseReport {
        name,
        mode: Mode::WholeProgram,
        warnings: vec![],
        assertions: statuses
            .into_iter()
            .map(|s| AssertionReport {
                kind: "assertTrue".into(),
                assertion: "assertTrue(\"a.\")".into(),
                status: s,
                detail: "d".into(),
                witnesses: vec![],
                witness_models: vec![],
            })
            .collect(),
        stats: None,
        transcript: None,
        duration: Duration::from_millis(1),
    })
}

proptest! {
    #[test]
    fn totals_match_cases(cases in prop::collection::vec(case_report(), 0..8)) {
        let r = TestReport::new("s".into(), cases, vec![], chrono::Utc::now());
        let count = |s: Status| r.cases.iter().filter(|c| c.status() == s).count();
        prop_assert_eq!(r.totals.passed, count(Status::Pass));
        prop_assert_eq!(r.totals.failed, count(Status::Fail));
        prop_assert_eq!(r.totals.errored, count(Status::Error));
        prop_assert_eq!(r.totals.passed + r.totals.failed + r.totals.errored, r.cases.len());
        let v: serde_json::Value = serde_json::from_str(&render_report(&r, Format::Json)).unwrap();
        prop_assert_eq!(v["totals"]["passed"].as_u64(), Some(r.totals.passed as u64));
        let expected_exit = if r.totals.errored > 0 { 2 } else if r.totals.failed > 0 { 1 } else { 0 };
        prop_assert_eq!(r.exit_code(), expected_exit);
    }
}
