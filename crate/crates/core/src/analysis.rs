//! Predicate dependency graphs, splitting closures, unit assembly and
//! result filtering.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::ast::{BodyElement, Program, Rule};
use crate::diag::Diagnostics;
use crate::model::AnswerSet;
use crate::parser::{merge_programs, parse_program};
use crate::subst::{alpha_equal, canonical_form};
use crate::testlang::{FilterPolarity, FilterScope, FilterSpec, InputSpec, Mode, TestCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredicateGraph {
    pub nodes: BTreeSet<String>,
    /// `(head predicate, body predicate, sign)`.
    pub edges: BTreeSet<(String, String, Sign)>,
}

impl PredicateGraph {
    pub fn successors<'a>(&'a self, p: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(from, _, _)| from == p)
            .map(|(_, to, _)| to.as_str())
    }

    /// Shortest path from `from` to `to` along edges, endpoints included.
    fn path(&self, from: &str, to: &str) -> Option<Vec<String>> {
        let mut prev: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(p) = queue.pop_front() {
            for q in self.successors(p) {
                if q == to {
                    let mut path = vec![to.to_string(), p.to_string()];
                    let mut cur = p;
                    while let Some(&b) = prev.get(cur) {
                        path.push(b.to_string());
                        cur = b;
                    }
                    path.reverse();
                    return Some(path);
                }
                if seen.insert(q) {
                    prev.insert(q, p);
                    queue.push_back(q);
                }
            }
        }
        None
    }
}

pub fn build_dependency_graph(p: &Program) -> PredicateGraph {
    let mut g = PredicateGraph::default();
    for r in p.rules() {
        g.nodes.extend(r.predicates().into_iter().map(str::to_string));
        for h in r.head_predicates() {
            for b in &r.body {
                let (to, sign) = match b {
                    BodyElement::Literal {
                        literal,
                        default_negated,
                    } => (
                        literal.predicate(),
                        if *default_negated { Sign::Negative } else { Sign::Positive },
                    ),
                    BodyElement::Count(c) => (c.pattern.predicate(), Sign::Positive),
                    BodyElement::Comparison { .. } => continue,
                };
                g.edges.insert((h.to_string(), to.to_string(), sign));
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitClosure {
    pub predicates: BTreeSet<String>,
    /// Regular rules whose head predicates all lie in `predicates`.
    pub bottom: Vec<Rule>,
}

/// Smallest predicate set containing `seed` such that every regular rule
/// with a head predicate inside it has all of its predicates inside it.
pub fn splitting_closure<S: AsRef<str>>(p: &Program, seed: impl IntoIterator<Item = S>) -> SplitClosure {
    let mut preds: BTreeSet<String> = seed.into_iter().map(|s| s.as_ref().to_string()).collect();
    loop {
        let mut changed = false;
        for r in p.rules().iter().filter(|r| r.is_regular()) {
            if r.head_predicates().any(|h| preds.contains(h)) {
                for q in r.predicates() {
                    if !preds.contains(q) {
                        preds.insert(q.to_string());
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let bottom = p
        .rules()
        .iter()
        .filter(|r| r.is_regular() && r.head_predicates().all(|h| preds.contains(h)))
        .cloned()
        .collect();
    SplitClosure {
        predicates: preds,
        bottom,
    }
}

/// Warns when a selected rule's head predicate sits on a dependency cycle
/// through the head predicate of a regular rule outside the selection.
pub fn check_selection_compatibility(p: &Program, selected: &[Rule]) -> Vec<String> {
    let g = build_dependency_graph(p);
    let selected_canon: HashSet<_> = selected.iter().map(canonical_form).collect();
    let outside: BTreeSet<&str> = p
        .rules()
        .iter()
        .filter(|r| r.is_regular() && !selected_canon.contains(&canonical_form(r)))
        .flat_map(|r| r.head_predicates())
        .collect();
    let heads: BTreeSet<&str> = selected.iter().flat_map(|r| r.head_predicates()).collect();

    let mut warnings = Vec::new();
    for h in heads {
        for &q in &outside {
            let cycle = if q == h {
                g.path(h, h)
            } else {
                match (g.path(h, q), g.path(q, h)) {
                    (Some(mut there), Some(back)) => {
                        there.extend(back.into_iter().skip(1));
                        Some(there)
                    }
                    _ => None,
                }
            };
            if let Some(cycle) = cycle {
                warnings.push(format!(
                    "selected rules do not form a splitting set: {h} depends recursively on {q}, which is defined by an unselected rule (cycle {})",
                    cycle.join(" -> ")
                ));
                break;
            }
        }
    }
    warnings
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("unknown rule name {0}")]
    UnknownRule(String),
    #[error("{0}")]
    Inputs(Diagnostics),
}

/// The program a test case runs, plus what was selected and any warnings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unit {
    pub program: Program,
    pub selected: Vec<Rule>,
    pub warnings: Vec<String>,
}

/// Builds the program for `case` from resolved global and local inputs.
///
/// `file_origin` maps a path named in `excludeInputFile` to the origin
/// string carried by rules read from that file.
pub fn assemble_unit(
    global: &Program,
    local: &Program,
    case: &TestCase,
    file_origin: impl Fn(&str) -> String,
) -> Result<Unit, AssemblyError> {
    let union = merge_programs([global, local]).map_err(AssemblyError::Inputs)?;
    let mut warnings = Vec::new();

    let mut excluded: Vec<Rule> = Vec::new();
    let mut excluded_origins: BTreeSet<String> = BTreeSet::new();
    for ex in &case.exclusions {
        let hit = match ex {
            InputSpec::Inline(text) => {
                let frag = parse_program(text, "excludeInput")
                    .map_err(AssemblyError::Inputs)?
                    .value;
                let hit = frag
                    .rules()
                    .iter()
                    .any(|f| union.rules().iter().any(|r| alpha_equal(r, f)));
                excluded.extend(frag.into_rules());
                hit
            }
            InputSpec::File(path) => {
                let origin = file_origin(path);
                let hit = union.rules().iter().any(|r| r.origin == origin);
                excluded_origins.insert(origin);
                hit
            }
        };
        if !hit {
            warnings.push(format!("{} matches no rule of the inputs", exclusion_label(ex)));
        }
    }
    let kept = |r: &Rule| !excluded_origins.contains(&r.origin) && !excluded.iter().any(|e| alpha_equal(r, e));
    let remaining: Vec<Rule> = union.rules().iter().filter(|r| kept(r)).cloned().collect();

    let mut selected = Vec::new();
    for name in &case.selected_rule_names {
        match union.rule_named(name) {
            None => return Err(AssemblyError::UnknownRule(name.clone())),
            Some(r) if kept(r) => selected.push(r.clone()),
            Some(_) => warnings.push(format!("selected rule {name} is removed by an exclusion")),
        }
    }

    let local_canon: HashSet<_> = local.rules().iter().map(canonical_form).collect();
    let is_local = |r: &Rule| local_canon.contains(&canonical_form(r));
    let remaining_program = program_of(remaining.iter().cloned());

    let rules: Vec<Rule> = match case.mode {
        Mode::WholeProgram => remaining,
        Mode::SelectedRules => {
            let chosen: HashSet<_> = selected.iter().map(canonical_form).collect();
            remaining
                .into_iter()
                .filter(|r| chosen.contains(&canonical_form(r)) || is_local(r))
                .collect()
        }
        Mode::SplitProgram => {
            let seed: BTreeSet<&str> = selected.iter().flat_map(Rule::predicates).collect();
            let closure = splitting_closure(&remaining_program, seed);
            let bottom: HashSet<_> = closure.bottom.iter().map(canonical_form).collect();
            remaining
                .into_iter()
                .filter(|r| bottom.contains(&canonical_form(r)) || is_local(r))
                .collect()
        }
    };
    if case.mode != Mode::WholeProgram {
        warnings.extend(check_selection_compatibility(&remaining_program, &selected));
    }
    Ok(Unit {
        program: program_of(rules),
        selected,
        warnings,
    })
}

fn exclusion_label(ex: &InputSpec) -> String {
    match ex {
        InputSpec::Inline(t) => format!("excludeInput({:?})", t),
        InputSpec::File(p) => format!("excludeInputFile({:?})", p),
    }
}

/// Rules drawn from an already name-consistent program.
fn program_of(rules: impl IntoIterator<Item = Rule>) -> Program {
    Program::from_rules(rules).expect("subset of a program with unique names")
}

/// Keeps the literals whose predicate the filter lists; `pfilter` keeps only
/// positive ones among them and `nfilter` only strongly negated ones.
pub fn apply_filter(a: &AnswerSet, f: Option<&FilterSpec>, selected: &[Rule]) -> AnswerSet {
    let Some(f) = f else {
        return a.clone();
    };
    let preds: BTreeSet<&str> = match &f.scope {
        FilterScope::Predicates(names) => names.iter().map(String::as_str).collect(),
        FilterScope::SelectedRules => selected.iter().flat_map(|r| r.head_predicates()).collect(),
    };
    a.retain(|l| {
        preds.contains(l.predicate())
            && match f.polarity {
                FilterPolarity::Filter => true,
                FilterPolarity::PFilter => !l.strongly_negated,
                FilterPolarity::NFilter => l.strongly_negated,
            }
    })
}
