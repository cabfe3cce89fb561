use std::collections::BTreeSet;

use proptest::prelude::*;

use aspunit_core::analysis::{apply_filter, splitting_closure};
use aspunit_core::assertions::satisfies_constraint;
use aspunit_core::ast::{Program, Term};
use aspunit_core::model::{AnswerSet, SolverResult};
use aspunit_core::parser::{parse_atom_list, parse_program, serialize_program};
use aspunit_core::solver::{enumerate_answer_sets, ground, is_answer_set, Enumerator};
use aspunit_core::subst::{alpha_equal, apply_substitution, match_atom};
use aspunit_core::testlang::{FilterPolarity, FilterScope, FilterSpec};

// ---------- random ground programs ----------

/// Literal pool: a0..a6 and -a0..-a2.
fn lit_text(i: usize) -> String {
    if i < 7 {
        format!("a{i}")
    } else {
        format!("-a{}", i - 7)
    }
}

#[derive(Debug, Clone)]
struct GRule {
    head: Vec<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

fn grule() -> impl Strategy<Value = GRule> {
    (
        prop::collection::vec(0..10usize, 0..=2),
        prop::collection::vec(0..10usize, 0..=2),
        prop::collection::vec(0..10usize, 0..=2),
    )
        .prop_map(|(head, pos, neg)| GRule { head, pos, neg })
        .prop_filter("empty constraint", |r| !(r.head.is_empty() && r.pos.is_empty() && r.neg.is_empty()))
}

fn render(rules: &[GRule]) -> String {
    let mut out = String::new();
    for r in rules {
        let head: Vec<String> = r.head.iter().map(|&i| lit_text(i)).collect();
        let body: Vec<String> = r
            .pos
            .iter()
            .map(|&i| lit_text(i))
            .chain(r.neg.iter().map(|&i| format!("not {}", lit_text(i))))
            .collect();
        out.push_str(&head.join(" | "));
        if !body.is_empty() {
            out.push_str(" :- ");
            out.push_str(&body.join(", "));
        }
        out.push_str(".\n");
    }
    out
}

fn ground_program() -> impl Strategy<Value = Vec<GRule>> {
    prop::collection::vec(grule(), 1..=15)
}

fn family(r: &SolverResult) -> BTreeSet<BTreeSet<String>> {
    r.answer_sets
        .iter()
        .map(|a| a.iter().map(ToString::to_string).collect())
        .collect()
}

fn solve_text(text: &str) -> SolverResult {
    let p = parse_program(text, "gen").unwrap().value;
    enumerate_answer_sets(&ground(&p).unwrap(), 0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn enumeration_agrees_with_exhaustive_check(rules in ground_program()) {
        let p = parse_program(&render(&rules), "gen").unwrap().value;
        let g = ground(&p).unwrap();
        let atoms = g.atoms().to_vec();
        prop_assume!(atoms.len() <= 10);
        let mut brute = BTreeSet::new();
        for mask in 0u32..(1 << atoms.len()) {
            let cand = atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| l.clone());
            if let Ok(a) = AnswerSet::new(cand) {
                if is_answer_set(&g, &a) {
                    brute.insert(a.iter().map(ToString::to_string).collect::<BTreeSet<_>>());
                }
            }
        }
        let r = enumerate_answer_sets(&g, 0).unwrap();
        prop_assert_eq!(family(&r), brute);
    }

    #[test]
    fn answer_sets_form_an_antichain(rules in ground_program()) {
        let r = solve_text(&render(&rules));
        let sets: Vec<BTreeSet<String>> = family(&r).into_iter().collect();
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                prop_assert!(i == j || !a.is_subset(b), "{a:?} within {b:?}");
            }
        }
    }

    #[test]
    fn constraints_only_remove_answer_sets(rules in ground_program(), c in grule()) {
        let c = GRule { head: vec![], ..c };
        prop_assume!(!c.pos.is_empty() || !c.neg.is_empty());
        let base = render(&rules);
        let with_c = format!("{base}{}", render(std::slice::from_ref(&c)));
        let before = solve_text(&base);
        let after = solve_text(&with_c);
        let cons = parse_program(&render(&[c]), "c").unwrap().value.rules()[0].clone();
        let expected: BTreeSet<BTreeSet<String>> = before
            .answer_sets
            .iter()
            .filter(|a| satisfies_constraint(a, &cons).unwrap())
            .map(|a| a.iter().map(ToString::to_string).collect())
            .collect();
        prop_assert_eq!(family(&after), expected);
    }

    #[test]
    fn enumeration_is_deterministic(rules in ground_program()) {
        let p = parse_program(&render(&rules), "gen").unwrap().value;
        let g = ground(&p).unwrap();
        let a = Enumerator::sequential().enumerate(&g).unwrap();
        let b = Enumerator::parallel().enumerate(&g).unwrap();
        let c = Enumerator::parallel().enumerate(&g).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&b, &c);
    }

    #[test]
    fn splitting_bottom_contains_restrictions(rules in ground_program(), seed in prop::collection::btree_set(0..7usize, 0..3)) {
        let p = parse_program(&render(&rules), "gen").unwrap().value;
        let seed: Vec<String> = seed.into_iter().map(|i| format!("a{i}")).collect();
        let closure = splitting_closure(&p, &seed);
        let bottom = Program::from_rules(closure.bottom.clone()).unwrap();
        let bottom_sets = family(&enumerate_answer_sets(&ground(&bottom).unwrap(), 0).unwrap());
        let full = enumerate_answer_sets(&ground(&p).unwrap(), 0).unwrap();
        for a in &full.answer_sets {
            let restricted: BTreeSet<String> = a
                .iter()
                .filter(|l| closure.predicates.contains(l.predicate()))
                .map(ToString::to_string)
                .collect();
            prop_assert!(bottom_sets.contains(&restricted), "{restricted:?} not an answer set of the bottom");
        }
    }
}

// ---------- predicate-level programs for the closure ----------

fn pred_rule() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(0..8usize, 0..=2),
        prop::collection::vec((0..8usize, any::<bool>()), 0..=3),
        0..10u8,
    )
        .prop_filter_map("empty rule", |(head, body, kind)| {
            if head.is_empty() && body.is_empty() {
                return None;
            }
            let body: Vec<String> = body
                .into_iter()
                .map(|(p, naf)| if naf { format!("not p{p}(X)") } else { format!("p{p}(X)") })
                .collect();
            let guard = if body.is_empty() { String::new() } else { "d(X), ".to_string() };
            let body_text = format!("{guard}{}", body.join(", "));
            let head: Vec<String> = head.into_iter().map(|p| format!("p{p}(X)")).collect();
            Some(match (kind, head.is_empty()) {
                (0, _) if !body.is_empty() => format!(":~ {body_text}. [1:1]"),
                (_, true) => format!(":- {body_text}."),
                (_, false) if body.is_empty() => format!("{}.", head.join(" | ").replace("(X)", "(1)")),
                (_, false) => format!("{} :- {body_text}.", head.join(" | ")),
            })
        })
}

fn pred_program() -> impl Strategy<Value = Program> {
    prop::collection::vec(pred_rule(), 0..12).prop_map(|rs| parse_program(&rs.join("\n"), "gen").unwrap().value)
}

fn closure_invariant_holds(p: &Program, preds: &BTreeSet<String>) -> bool {
    p.rules()
        .iter()
        .filter(|r| r.is_regular())
        .filter(|r| r.head_predicates().any(|h| preds.contains(h)))
        .all(|r| r.predicates().iter().all(|q| preds.contains(*q)))
}

fn seed_set() -> impl Strategy<Value = BTreeSet<String>> {
    prop::collection::btree_set((0..8usize).prop_map(|i| format!("p{i}")), 0..4)
}

proptest! {
    #[test]
    fn closure_is_closed_and_minimal(p in pred_program(), seed in seed_set()) {
        let c = splitting_closure(&p, &seed);
        prop_assert!(seed.is_subset(&c.predicates));
        prop_assert!(closure_invariant_holds(&p, &c.predicates));
        // minimal: dropping any non-seed predicate breaks the invariant
        for q in c.predicates.difference(&seed) {
            let mut smaller = c.predicates.clone();
            smaller.remove(q);
            prop_assert!(!closure_invariant_holds(&p, &smaller), "{q} is removable");
        }
        for r in &c.bottom {
            prop_assert!(r.is_regular());
            prop_assert!(r.predicates().iter().all(|q| c.predicates.contains(*q)));
        }
    }

    #[test]
    fn closure_is_monotone(p in pred_program(), s1 in seed_set(), extra in seed_set()) {
        let s2: BTreeSet<String> = s1.union(&extra).cloned().collect();
        let c1 = splitting_closure(&p, &s1);
        let c2 = splitting_closure(&p, &s2);
        prop_assert!(c1.predicates.is_subset(&c2.predicates));
    }
}

// ---------- non-ground fragments ----------

fn term() -> impl Strategy<Value = String> + Clone {
    prop_oneof![
        Just("X".to_string()),
        Just("Y".to_string()),
        Just("Z".to_string()),
        (1..4u8).prop_map(|n| n.to_string()),
        Just("a".to_string()),
        Just("\"s t\"".to_string()),
    ]
}

fn ground_term() -> impl Strategy<Value = String> + Clone {
    prop_oneof![(1..4u8).prop_map(|n| n.to_string()), Just("a".to_string()), Just("b".to_string())]
}

fn atom_with(t: impl Strategy<Value = String> + Clone) -> impl Strategy<Value = String> {
    prop_oneof![
        t.clone().prop_map(|x| format!("p({x})")),
        (t.clone(), t.clone()).prop_map(|(x, y)| format!("q({x},{y})")),
        (t.clone(), t).prop_map(|(x, y)| format!("-q({x},{y})")),
        Just("r".to_string()),
    ]
}

fn ground_atoms() -> impl Strategy<Value = AnswerSet> {
    prop::collection::vec(atom_with(ground_term()), 0..8).prop_filter_map("inconsistent", |atoms| {
        if atoms.is_empty() {
            return Some(AnswerSet::empty());
        }
        AnswerSet::new(parse_atom_list(&format!("{}.", atoms.join(". "))).unwrap()).ok()
    })
}

/// A safe rule: every variable appears in a positive body atom.
fn safe_rule() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(atom_with(term()), 0..=2),
        prop::collection::vec(atom_with(term()), 1..=2),
        prop::collection::vec(atom_with(term()), 0..=2),
        0..4u8,
        (1..5u64, 1..4u64),
    )
        .prop_map(|(head, pos, naf, kind, (w, l))| {
            // bind every variable with a domain atom so any use is safe
            let mut body = vec!["dom(X)".to_string(), "dom(Y)".to_string(), "dom(Z)".to_string()];
            body.extend(pos);
            body.extend(naf.into_iter().map(|a| format!("not {a}")));
            if kind == 1 {
                body.push("X < Y".to_string());
            }
            if kind == 2 {
                body.push("#count{ X: p(X) } >= 2".to_string());
            }
            let body = body.join(", ");
            match (kind, head.is_empty()) {
                (3, _) => format!(":~ {body}. [{w}:{l}]"),
                // #count may only appear in constraints
                (2, _) | (_, true) => format!(":- {body}."),
                (_, false) => format!("{} :- {body}.", head.join(" v ")),
            }
        })
}

fn rename(rule: &str, perm: &[&str; 3]) -> String {
    // rename X,Y,Z through a permutation of fresh names
    rule.replace('X', "\u{1}").replace('Y', "\u{2}").replace('Z', "\u{3}")
        .replace('\u{1}', perm[0])
        .replace('\u{2}', perm[1])
        .replace('\u{3}', perm[2])
}

proptest! {
    #[test]
    fn filter_is_idempotent(a in ground_atoms(), preds in prop::collection::vec(prop_oneof![Just("p"), Just("q"), Just("r")], 0..3), pol in 0..3u8) {
        let f = FilterSpec {
            polarity: [FilterPolarity::Filter, FilterPolarity::PFilter, FilterPolarity::NFilter][pol as usize],
            scope: FilterScope::Predicates(preds.into_iter().map(String::from).collect()),
        };
        let once = apply_filter(&a, Some(&f), &[]);
        prop_assert_eq!(apply_filter(&once, Some(&f), &[]), once.clone());
        prop_assert!(once.literals().is_subset(a.literals()));
        prop_assert_eq!(apply_filter(&a, None, &[]), a);
    }

    #[test]
    fn match_then_apply_gives_the_fact(pattern in atom_with(term()), fact in atom_with(ground_term())) {
        let pattern = parse_atom_list(&format!("{pattern}.")).unwrap().remove(0);
        let fact = parse_atom_list(&format!("{fact}.")).unwrap().remove(0);
        match match_atom(&pattern, &fact) {
            Some(sigma) => prop_assert_eq!(apply_substitution(&pattern, &sigma), fact),
            None => {
                if pattern.is_ground() {
                    prop_assert_ne!(pattern, fact);
                }
            }
        }
    }

    #[test]
    fn alpha_equivalence_is_an_equivalence(rule in safe_rule()) {
        let names = [["X", "Y", "Z"], ["A", "B", "C"], ["V1", "V2", "V3"], ["Z", "X", "Y"]];
        let parsed: Vec<_> = names
            .iter()
            .map(|n| parse_program(&rename(&rule, n), "r").unwrap().value.rules()[0].clone())
            .collect();
        for a in &parsed {
            prop_assert!(alpha_equal(a, a));
            for b in &parsed {
                prop_assert_eq!(alpha_equal(a, b), alpha_equal(b, a));
                prop_assert!(alpha_equal(a, b));
            }
        }
    }

    #[test]
    fn serialization_round_trips(rules in prop::collection::vec(safe_rule(), 1..6), named in any::<bool>()) {
        let text: String = rules
            .iter()
            .enumerate()
            .map(|(i, r)| if named { format!("% n{i}\n{r}\n") } else { format!("{r}\n") })
            .collect();
        let first = parse_program(&text, "rt").unwrap().value;
        let second = parse_program(&serialize_program(&first), "rt").unwrap().value;
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(serialize_program(&first), serialize_program(&second));
    }

    #[test]
    fn constraint_check_agrees_with_solver(a in ground_atoms(), rule in safe_rule()) {
        let p = parse_program(&rule, "c").unwrap().value;
        let c = p.rules()[0].clone();
        prop_assume!(c.head.is_empty() && !matches!(c.kind, aspunit_core::ast::RuleKind::WeakConstraint { .. }));
        let mut facts: String = a.iter().map(|l| format!("{l}.\n")).collect();
        // the domain over which the constraint's variables range
        let dom: BTreeSet<Term> = a.iter().flat_map(|l| l.atom.terms.clone()).collect();
        // an empty universe is a grounding error by design
        prop_assume!(!dom.is_empty());
        for t in &dom {
            facts.push_str(&format!("dom({t}).\n"));
        }
        let with_dom = AnswerSet::new(
            a.iter().cloned().chain(dom.iter().map(|t| parse_atom_list(&format!("dom({t}).")).unwrap().remove(0))),
        )
        .unwrap();
        let solved = solve_text(&format!("{facts}{rule}\n"));
        let expected = satisfies_constraint(&with_dom, &c).unwrap();
        prop_assert_eq!(solved.len() == 1, expected);
    }
}
