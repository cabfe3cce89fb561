//! Recorded solver transcripts replayed through the output parsers and
//! compared with the internal solver.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use aspunit_core::adapter::{parse_clingo_output, parse_dlv_output, weak_levels};
use aspunit_core::ast::Program;
use aspunit_core::model::SolverResult;
use aspunit_core::parser::parse_program;
use aspunit_core::solver::{enumerate_answer_sets, ground};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn programs() -> Vec<(String, Program)> {
    let mut out: Vec<(String, Program)> = std::fs::read_dir(fixtures().join("programs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "dl"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).unwrap();
            (name, parse_program(&text, "fixture").unwrap().value)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn transcript(name: &str, kind: &str) -> String {
    std::fs::read_to_string(fixtures().join(format!("transcripts/{name}.{kind}.txt"))).unwrap()
}

fn texts(r: &SolverResult) -> BTreeSet<BTreeSet<String>> {
    r.answer_sets
        .iter()
        .map(|a| a.iter().map(ToString::to_string).collect())
        .collect()
}

fn internal(p: &Program) -> SolverResult {
    enumerate_answer_sets(&ground(p).unwrap(), 0).unwrap()
}

#[test]
fn corpus_is_present() {
    let names: Vec<String> = programs().into_iter().map(|(n, _)| n).collect();
    assert!(names.len() >= 10, "{names:?}");
    assert!(names.contains(&"clique_full".to_string()));
}

#[test]
fn clingo_transcripts_match_internal_solver() {
    for (name, p) in programs() {
        let levels = weak_levels(&p);
        let parsed = parse_clingo_output(&transcript(&name, "clingo"), 0, Some(&levels))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let ours = internal(&p);
        assert!(parsed.complete, "{name}");
        assert_eq!(texts(&parsed.optimal()), texts(&ours.optimal()), "{name}");
        assert_eq!(parsed.best_cost, ours.best_cost, "{name}");
        if levels.is_empty() {
            assert_eq!(texts(&parsed), texts(&ours), "{name}");
        }
    }
}

#[test]
fn dlv_transcripts_match_internal_solver() {
    for (name, p) in programs() {
        let parsed = parse_dlv_output(&transcript(&name, "dlv"), 0).unwrap_or_else(|e| panic!("{name}: {e}"));
        let ours = internal(&p).optimal();
        assert_eq!(texts(&parsed), texts(&ours), "{name}");
        assert_eq!(parsed.best_cost, ours.best_cost, "{name}");
    }
}

#[test]
fn capped_transcripts_are_incomplete() {
    let p = parse_program(&std::fs::read_to_string(fixtures().join("programs/guess_clique.dl")).unwrap(), "f")
        .unwrap()
        .value;
    let all = texts(&internal(&p));
    let clingo = parse_clingo_output(&transcript("guess_clique.cap3", "clingo"), 3, None).unwrap();
    let dlv = parse_dlv_output(&transcript("guess_clique.cap3", "dlv"), 3).unwrap();
    for r in [clingo, dlv] {
        assert!(!r.complete);
        assert_eq!(r.len(), 3);
        assert!(texts(&r).is_subset(&all));
    }
}

#[test]
fn clique_best_cost_is_three() {
    let r = parse_clingo_output(&transcript("clique_full", "clingo"), 0, Some(&[1])).unwrap();
    assert_eq!(r.best_cost.as_ref().map(|c| c.at_level(1)), Some(3));
    let r = parse_dlv_output(&transcript("clique_full", "dlv"), 0).unwrap();
    assert_eq!(r.best_cost.as_ref().map(|c| c.at_level(1)), Some(3));
    assert_eq!(r.len(), 1);
}
