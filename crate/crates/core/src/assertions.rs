//! Evaluation of test assertions over solver results.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{BodyElement, ClassicalLiteral, Rule, Term};
use crate::model::{AnswerSet, SolverResult};
use crate::subst::{count_aggregate, join, match_atom, LiteralIndex, Substitute};
use crate::testlang::{render_atom_list, Assertion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionOutcome {
    pub assertion: Assertion,
    pub status: Status,
    /// Indices into the evaluated answer sets that support the verdict.
    pub witness_sets: Vec<usize>,
    pub detail: String,
    /// Number of answer sets in which the assertion's condition held, for
    /// atom and constraint assertions.
    pub observed: Option<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unsafe constraint: variable {0} is not bound by a positive body literal")]
pub struct UnsafeConstraint(pub String);

/// Ground instances of `pattern` in `a`.
fn instances<'a>(a: &'a AnswerSet, pattern: &'a ClassicalLiteral) -> impl Iterator<Item = &'a ClassicalLiteral> + 'a {
    a.iter().filter(move |l| match_atom(pattern, l).is_some())
}

/// Every literal of `atoms` has a true instance in `a`. Literals are
/// matched independently; variables are not shared across the list.
pub fn holds_true(a: &AnswerSet, atoms: &[ClassicalLiteral]) -> bool {
    atoms.iter().all(|p| instances(a, p).next().is_some())
}

/// No literal of `atoms` has a true instance in `a`.
pub fn holds_false(a: &AnswerSet, atoms: &[ClassicalLiteral]) -> bool {
    atoms.iter().all(|p| instances(a, p).next().is_none())
}

/// True iff no instance of the constraint body holds in `a`.
pub fn satisfies_constraint(a: &AnswerSet, c: &Rule) -> Result<bool, UnsafeConstraint> {
    if let Some(v) = c.unsafe_variables().into_iter().next() {
        return Err(UnsafeConstraint(v));
    }
    let index: LiteralIndex = a.iter().cloned().collect();
    let mut positives = Vec::new();
    let mut comparisons = Vec::new();
    for b in &c.body {
        match b {
            BodyElement::Literal {
                literal,
                default_negated: false,
            } => positives.push(literal),
            BodyElement::Comparison { left, op, right } => comparisons.push((left, *op, right)),
            _ => {}
        }
    }
    for sigma in join(&positives, &comparisons, &index, Default::default()) {
        let body_true = c.body.iter().all(|b| match b {
            BodyElement::Literal {
                literal,
                default_negated: true,
            } => !a.contains(&literal.substitute(&sigma)),
            BodyElement::Count(agg) => {
                let agg = agg.substitute(&sigma);
                let n = count_aggregate(&agg, &index) as i64;
                agg.op.eval(&Term::Int(n), &agg.guard)
            }
            _ => true,
        });
        if body_true {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantifier {
    All,
    Some,
    Exactly(u64),
    AtLeast(u64),
    AtMost(u64),
}

fn quantifier(a: &Assertion) -> Option<Quantifier> {
    use Assertion::*;
    Some(match a {
        TrueAll(_) | FalseAll(_) | ConstraintAll(_) => Quantifier::All,
        TrueBrave(_) | FalseBrave(_) => Quantifier::Some,
        TrueIn(n, _) | FalseIn(n, _) | ConstraintIn(n, _) => Quantifier::Exactly(*n),
        TrueInAtLeast(n, _) | FalseInAtLeast(n, _) | ConstraintInAtLeast(n, _) => Quantifier::AtLeast(*n),
        TrueInAtMost(n, _) | FalseInAtMost(n, _) | ConstraintInAtMost(n, _) => Quantifier::AtMost(*n),
        BestModelCost { .. } => return None,
    })
}

fn is_true_kind(a: &Assertion) -> bool {
    use Assertion::*;
    matches!(a, TrueAll(_) | TrueBrave(_) | TrueIn(..) | TrueInAtLeast(..) | TrueInAtMost(..))
}

fn constraint_of(a: &Assertion) -> Option<&Rule> {
    use Assertion::*;
    match a {
        ConstraintAll(c) | ConstraintIn(_, c) | ConstraintInAtLeast(_, c) | ConstraintInAtMost(_, c) => Some(c),
        _ => None,
    }
}

fn set_list(idx: &[usize]) -> String {
    idx.iter().map(|i| format!("#{i}")).collect::<Vec<_>>().join(", ")
}

/// Why the condition fails in `a`, naming offending literals and the set
/// restricted to the predicates the assertion mentions.
fn explain_atoms(a: &AnswerSet, atoms: &[ClassicalLiteral], want_true: bool) -> String {
    let preds: BTreeSet<&str> = atoms.iter().map(ClassicalLiteral::predicate).collect();
    let shown = a.retain(|l| preds.contains(l.predicate()));
    if want_true {
        let missing: Vec<String> = atoms
            .iter()
            .filter(|p| instances(a, p).next().is_none())
            .map(ToString::to_string)
            .collect();
        format!("no true instance of {} in {shown}", missing.join(", "))
    } else {
        let present: BTreeSet<String> = atoms
            .iter()
            .flat_map(|p| instances(a, p))
            .map(ToString::to_string)
            .collect();
        let present: Vec<String> = present.into_iter().collect();
        format!("{} true in {shown}", present.join(", "))
    }
}

/// Evaluates `assertion`. `filtered` holds the result's answer sets after
/// filtering, in the same order; witness indices refer to it.
pub fn evaluate_assertion(assertion: &Assertion, result: &SolverResult, filtered: &[AnswerSet]) -> AssertionOutcome {
    let outcome = |status, witness_sets, detail: String, observed| AssertionOutcome {
        assertion: assertion.clone(),
        status,
        witness_sets,
        detail,
        observed,
    };

    if let Assertion::BestModelCost { cost, level } = assertion {
        let Some(best) = result.best_cost.as_ref().filter(|_| result.has_costs()) else {
            return outcome(Status::Error, Vec::new(), "no weak constraints in run".into(), None);
        };
        if !result.complete {
            return outcome(
                Status::Error,
                Vec::new(),
                "enumeration truncated: the best model may not have been seen".into(),
                None,
            );
        }
        let optimal: Vec<usize> = (0..result.len())
            .filter(|&i| result.cost_vectors[i].as_ref() == Some(best))
            .collect();
        let actual = best.at_level(*level);
        return if actual == *cost {
            outcome(Status::Pass, optimal, format!("best model cost {best}"), None)
        } else {
            outcome(
                Status::Fail,
                optimal.clone(),
                format!(
                    "best model cost at level {level} is {actual}, expected {cost} (best model {} with cost {best})",
                    set_list(&optimal)
                ),
                None,
            )
        };
    }

    let q = quantifier(assertion).expect("non-cost assertion");
    let total = filtered.len();
    let mut holding = Vec::new();
    let mut failing = Vec::new();
    for (i, a) in filtered.iter().enumerate() {
        let ok = if let Some(c) = constraint_of(assertion) {
            match satisfies_constraint(a, c) {
                Ok(v) => v,
                Err(e) => return outcome(Status::Error, Vec::new(), e.to_string(), None),
            }
        } else if is_true_kind(assertion) {
            holds_true(a, assertion.atoms().unwrap())
        } else {
            holds_false(a, assertion.atoms().unwrap())
        };
        if ok {
            holding.push(i);
        } else {
            failing.push(i);
        }
    }
    let k = holding.len();
    let what = match assertion {
        a if constraint_of(a).is_some() => "constraint satisfied".to_string(),
        a if is_true_kind(a) => format!("{} true", render_atom_list(a.atoms().unwrap())),
        a => format!("{} false", render_atom_list(a.atoms().unwrap())),
    };
    let summary = format!("{what} in {k} of {total} answer sets");
    let explain = |i: usize| -> String {
        let a = &filtered[i];
        match assertion.atoms() {
            Some(atoms) => format!("answer set #{i}: {}", explain_atoms(a, atoms, is_true_kind(assertion))),
            None => format!("answer set #{i} violates {}: {a}", constraint_of(assertion).unwrap()),
        }
    };

    let passed = match q {
        Quantifier::All => k == total,
        Quantifier::Some => k >= 1,
        Quantifier::Exactly(n) => k as u64 == n,
        Quantifier::AtLeast(n) => k as u64 >= n,
        Quantifier::AtMost(n) => k as u64 <= n,
    };

    // Under a model cap a verdict stands only when unseen answer sets
    // cannot overturn it.
    if !result.complete {
        let settled = match q {
            Quantifier::All => !passed,
            Quantifier::Some | Quantifier::AtLeast(_) => passed,
            Quantifier::AtMost(_) => !passed,
            Quantifier::Exactly(_) => false,
        };
        if !settled {
            return outcome(
                Status::Error,
                Vec::new(),
                format!("enumeration truncated after {total} answer sets; {summary}"),
                Some(k),
            );
        }
    }

    if passed {
        let detail = if total == 0 && q == Quantifier::All {
            "vacuously true: no answer sets".to_string()
        } else {
            summary
        };
        return outcome(Status::Pass, holding, detail, Some(k));
    }

    let (witnesses, detail) = match q {
        Quantifier::All => {
            let first = explain(failing[0]);
            (failing.clone(), format!("{summary}; {first}"))
        }
        Quantifier::Some if total == 0 => (Vec::new(), "no answer sets".to_string()),
        Quantifier::Some => ((0..total).collect(), summary),
        Quantifier::Exactly(n) if (k as u64) < n => (failing.clone(), format!("{summary}, expected exactly {n}")),
        Quantifier::Exactly(n) => (holding.clone(), format!("{summary}, expected exactly {n}")),
        Quantifier::AtLeast(n) => (failing.clone(), format!("{summary}, expected at least {n}")),
        Quantifier::AtMost(n) => (holding.clone(), format!("{summary}, expected at most {n}")),
    };
    outcome(Status::Fail, witnesses, detail, Some(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostVector;
    use crate::parser::{parse_atom_list, parse_program};
    use crate::testlang::parse_test_suite;

    fn set(src: &str) -> AnswerSet {
        if src.trim().is_empty() {
            return AnswerSet::empty();
        }
        AnswerSet::new(parse_atom_list(src).unwrap()).unwrap()
    }

    fn atoms(src: &str) -> Vec<ClassicalLiteral> {
        parse_atom_list(src).unwrap()
    }

    fn constraint(src: &str) -> Rule {
        parse_program(src, "c").unwrap().value.into_rules().remove(0)
    }

    fn assertion(src: &str) -> Assertion {
        parse_test_suite(&format!("invocation(\"X\"); {src};"), "t")
            .unwrap()
            .value
            .global_assertions
            .remove(0)
    }

    fn result(sets: &[&str]) -> SolverResult {
        SolverResult::without_costs(sets.iter().map(|s| set(s)).collect(), true)
    }

    fn eval(a: &str, r: &SolverResult) -> AssertionOutcome {
        evaluate_assertion(&assertion(a), r, &r.answer_sets)
    }

    #[test]
    fn holds_true_examples() {
        assert!(holds_true(&set("inClique(1). inClique(4)."), &atoms("inClique(X).")));
        assert!(!holds_true(&set("outClique(1)."), &atoms("inClique(X).")));
        assert!(!holds_true(&set("uedge(1,2)."), &atoms("uedge(2,1).")));
    }

    #[test]
    fn holds_false_examples() {
        assert!(holds_false(&set(""), &atoms("inClique(X).")));
        assert!(!holds_false(&set("inClique(5)."), &atoms("inClique(2). inClique(5).")));
        assert!(holds_false(&set("node(1)."), &atoms("inClique(X).")));
    }

    #[test]
    fn independent_matching() {
        let a = set("p(1). q(2).");
        assert!(holds_true(&a, &atoms("p(X). q(X).")));
    }

    #[test]
    fn constraint_examples() {
        let size = constraint(":- #count{ X1: inClique(X1) } < 3.");
        assert_eq!(satisfies_constraint(&set("inClique(1). inClique(2). inClique(4). inClique(5)."), &size), Ok(true));
        assert_eq!(satisfies_constraint(&set("inClique(3). inClique(7)."), &size), Ok(false));
        let one_four = constraint(":- not inClique(1), not inClique(4).");
        assert_eq!(satisfies_constraint(&set("inClique(1)."), &one_four), Ok(true));
        assert_eq!(satisfies_constraint(&set("inClique(2)."), &one_four), Ok(false));
    }

    #[test]
    fn constraint_with_join_and_comparison() {
        let c = constraint(":- e(X,Y), e(Y,X), X < Y.");
        assert_eq!(satisfies_constraint(&set("e(1,2). e(2,3)."), &c), Ok(true));
        assert_eq!(satisfies_constraint(&set("e(1,2). e(2,1)."), &c), Ok(false));
        let g = constraint(":- n(N), #count{ X: p(X) } != N.");
        assert_eq!(satisfies_constraint(&set("n(2). p(a). p(b)."), &g), Ok(true));
        assert_eq!(satisfies_constraint(&set("n(3). p(a). p(b)."), &g), Ok(false));
    }

    #[test]
    fn unsafe_constraint_rejected() {
        let c = Rule::new(
            vec![],
            vec![BodyElement::naf(atoms("p(X).").remove(0))],
            crate::ast::RuleKind::Constraint,
        );
        assert_eq!(satisfies_constraint(&set("p(1)."), &c), Err(UnsafeConstraint("X".into())));
    }

    #[test]
    fn verdict_table() {
        let r = result(&["a. b.", "a.", "c."]);
        let cases = [
            ("assertTrue(\"a.\")", Status::Fail),
            ("assertBravelyTrue(\"b.\")", Status::Pass),
            ("assertTrueIn(2, \"a.\")", Status::Pass),
            ("assertTrueIn(1, \"a.\")", Status::Fail),
            ("assertTrueInAtLeast(3, \"a.\")", Status::Fail),
            ("assertTrueInAtMost(2, \"a.\")", Status::Pass),
            ("assertFalse(\"d.\")", Status::Pass),
            ("assertBravelyFalse(\"a.\")", Status::Pass),
            ("assertFalseIn(1, \"a.\")", Status::Pass),
            ("assertFalseInAtLeast(2, \"a.\")", Status::Fail),
            ("assertFalseInAtMost(0, \"c.\")", Status::Fail),
            ("assertConstraint(\":- a, not b.\")", Status::Fail),
            ("assertConstraintIn(2, \":- a, not b.\")", Status::Pass),
            ("assertConstraintInAtLeast(3, \":- d.\")", Status::Pass),
            ("assertConstraintInAtMost(0, \":- d.\")", Status::Fail),
        ];
        for (src, want) in cases {
            let o = eval(src, &r);
            assert_eq!(o.status, want, "{src}: {}", o.detail);
            if o.status == Status::Fail {
                assert!(!o.detail.is_empty() && !o.witness_sets.is_empty(), "{src}");
            }
        }
    }

    #[test]
    fn zero_answer_sets() {
        let r = result(&[]);
        let o = eval("assertTrue(\"a.\")", &r);
        assert_eq!(o.status, Status::Pass);
        assert!(o.detail.contains("vacuous"));
        assert_eq!(eval("assertBravelyTrue(\"a.\")", &r).status, Status::Fail);
        assert_eq!(eval("assertBravelyFalse(\"a.\")", &r).status, Status::Fail);
    }

    #[test]
    fn failing_detail_names_literal_and_restricted_model() {
        let r = result(&["node(1). edge(1,4). inClique(1). inClique(4). inClique(5). outClique(2)."]);
        let o = eval("assertFalse(\"inClique(2). inClique(5).\")", &r);
        assert_eq!(o.status, Status::Fail);
        assert_eq!(o.witness_sets, vec![0]);
        assert!(o.detail.contains("inClique(5) true in {inClique(1), inClique(4), inClique(5)}"), "{}", o.detail);
    }

    #[test]
    fn truncated_results() {
        let mut r = result(&["a.", "b."]);
        r.complete = false;
        let status = |s: &str| eval(s, &r).status;
        assert_eq!(status("assertTrueIn(1, \"a.\")"), Status::Error);
        assert_eq!(status("assertTrueInAtLeast(1, \"a.\")"), Status::Pass);
        assert_eq!(status("assertTrueInAtLeast(2, \"a.\")"), Status::Error);
        assert_eq!(status("assertTrueInAtMost(1, \"a.\")"), Status::Error);
        assert_eq!(status("assertTrueInAtMost(0, \"a.\")"), Status::Fail);
        assert_eq!(status("assertTrue(\"a.\")"), Status::Fail);
        assert_eq!(status("assertFalse(\"c.\")"), Status::Error);
        assert_eq!(status("assertBravelyTrue(\"a.\")"), Status::Pass);
        assert_eq!(status("assertBravelyTrue(\"c.\")"), Status::Error);
        assert!(eval("assertTrueIn(1, \"a.\")", &r).detail.contains("enumeration truncated"));
    }

    #[test]
    fn best_model_cost() {
        let r = SolverResult::new(
            vec![set("a."), set("b.")],
            vec![
                Some(CostVector::from_pairs([(1, 3)])),
                Some(CostVector::from_pairs([(1, 5)])),
            ],
            true,
        );
        let o = eval("assertBestModelCost(3)", &r);
        assert_eq!(o.status, Status::Pass);
        assert_eq!(o.witness_sets, vec![0]);
        assert_eq!(eval("assertBestModelCost(5)", &r).status, Status::Fail);
        assert_eq!(eval("assertBestModelCost(0, 2)", &r).status, Status::Pass);
        let plain = result(&["a."]);
        let e = eval("assertBestModelCost(3)", &plain);
        assert_eq!(e.status, Status::Error);
        assert_eq!(e.detail, "no weak constraints in run");
    }

    #[test]
    fn counts_are_reported() {
        let r = result(&["a.", "", "b."]);
        let o = eval("assertFalseInAtMost(1, \"a.\")", &r);
        assert_eq!(o.status, Status::Fail);
        assert_eq!(o.observed, Some(2));
        assert_eq!(o.witness_sets, vec![1, 2]);
    }
}
