//! Bottom-up instantiation restricted to possibly derivable atoms.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::ast::{
    BodyElement, ClassicalLiteral, CompareOp, CountAggregate, Program, Rule, RuleKind, Term,
};
use crate::solver::SolveError;
use crate::subst::{join, match_into, LiteralIndex, Substitute, Substitution};

pub type AtomId = usize;

/// A ground `#count` whose elements pair a tuple with the atom that
/// contributes it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundCount {
    pub elements: Vec<(Vec<Term>, AtomId)>,
    pub op: CompareOp,
    pub guard: Term,
}

impl GroundCount {
    pub fn holds(&self, truth: impl Fn(AtomId) -> bool) -> bool {
        let tuples: BTreeSet<&Vec<Term>> = self
            .elements
            .iter()
            .filter(|(_, a)| truth(*a))
            .map(|(t, _)| t)
            .collect();
        self.op.eval(&Term::Int(tuples.len() as i64), &self.guard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub head: Vec<AtomId>,
    pub positive: Vec<AtomId>,
    /// Default-negated atoms. Atoms that can never be derived are dropped,
    /// since `not a` is then always true.
    pub negative: Vec<AtomId>,
    pub counts: Vec<GroundCount>,
    pub kind: RuleKind,
}

impl GroundRule {
    /// Body truth under a total interpretation.
    pub fn body_holds(&self, m: &[bool]) -> bool {
        self.positive.iter().all(|&a| m[a])
            && self.negative.iter().all(|&a| !m[a])
            && self.counts.iter().all(|c| c.holds(|a| m[a]))
    }
}

/// A variable-free program over interned atoms.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    atoms: Vec<ClassicalLiteral>,
    ids: HashMap<ClassicalLiteral, AtomId>,
    rules: Vec<GroundRule>,
}

impl GroundProgram {
    /// Herbrand atoms in sorted order; an atom's id is its index here.
    pub fn atoms(&self) -> &[ClassicalLiteral] {
        &self.atoms
    }

    pub fn atom_id(&self, l: &ClassicalLiteral) -> Option<AtomId> {
        self.ids.get(l).copied()
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    pub fn regular_rules(&self) -> impl Iterator<Item = &GroundRule> {
        self.rules.iter().filter(|r| r.kind == RuleKind::Regular)
    }

    pub fn constraints(&self) -> impl Iterator<Item = &GroundRule> {
        self.rules.iter().filter(|r| r.kind == RuleKind::Constraint)
    }

    pub fn has_weak_constraints(&self) -> bool {
        self.rules
            .iter()
            .any(|r| matches!(r.kind, RuleKind::WeakConstraint { .. }))
    }

    /// Pairs `(p, -p)` of complementary atoms that both occur.
    pub fn complementary_pairs(&self) -> Vec<(AtomId, AtomId)> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.strongly_negated)
            .filter_map(|(i, l)| self.atom_id(&l.complement()).map(|j| (i, j)))
            .collect()
    }

    /// Ground weak constraints as ordinary rules. Weak constraints never
    /// contain aggregates, so the conversion is exact.
    pub fn weak_constraints(&self) -> Vec<Rule> {
        let lit = |a: &AtomId| self.atoms[*a].clone();
        self.rules
            .iter()
            .filter(|r| matches!(r.kind, RuleKind::WeakConstraint { .. }))
            .map(|r| {
                let body = r
                    .positive
                    .iter()
                    .map(|a| BodyElement::pos(lit(a)))
                    .chain(r.negative.iter().map(|a| BodyElement::naf(lit(a))))
                    .collect();
                Rule::new(Vec::new(), body, r.kind)
            })
            .collect()
    }

    fn write_rule(&self, f: &mut fmt::Formatter<'_>, r: &GroundRule) -> fmt::Result {
        let mut body: Vec<String> = r
            .positive
            .iter()
            .map(|a| self.atoms[*a].to_string())
            .chain(r.negative.iter().map(|a| format!("not {}", self.atoms[*a])))
            .collect();
        for c in &r.counts {
            let elems: Vec<String> = c
                .elements
                .iter()
                .map(|(t, a)| {
                    let t: Vec<String> = t.iter().map(Term::to_string).collect();
                    format!("{}: {}", t.join(","), self.atoms[*a])
                })
                .collect();
            body.push(format!("#count{{{}}} {} {}", elems.join("; "), c.op, c.guard));
        }
        let body = body.join(", ");
        match r.kind {
            RuleKind::Regular => {
                let head: Vec<String> = r.head.iter().map(|a| self.atoms[*a].to_string()).collect();
                if body.is_empty() {
                    write!(f, "{}.", head.join(" | "))
                } else {
                    write!(f, "{} :- {body}.", head.join(" | "))
                }
            }
            RuleKind::Constraint => write!(f, ":- {body}."),
            RuleKind::WeakConstraint { weight, level } => write!(f, ":~ {body}. [{weight}:{level}]"),
        }
    }
}

impl fmt::Display for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            self.write_rule(f, r)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

struct SplitBody<'a> {
    positives: Vec<&'a ClassicalLiteral>,
    negatives: Vec<&'a ClassicalLiteral>,
    comparisons: Vec<(&'a Term, CompareOp, &'a Term)>,
    counts: Vec<&'a CountAggregate>,
}

fn split_body(rule: &Rule) -> SplitBody<'_> {
    let mut s = SplitBody {
        positives: Vec::new(),
        negatives: Vec::new(),
        comparisons: Vec::new(),
        counts: Vec::new(),
    };
    for b in &rule.body {
        match b {
            BodyElement::Literal {
                literal,
                default_negated: false,
            } => s.positives.push(literal),
            BodyElement::Literal { literal, .. } => s.negatives.push(literal),
            BodyElement::Comparison { left, op, right } => s.comparisons.push((left, *op, right)),
            BodyElement::Count(c) => s.counts.push(c),
        }
    }
    s
}

fn instances(rule: &Rule, index: &LiteralIndex) -> Vec<Substitution> {
    let body = split_body(rule);
    join(&body.positives, &body.comparisons, index, Substitution::new())
}

/// Instantiates `p` over the atoms that some rule could derive.
///
/// Only instances whose positive body atoms are possibly derivable are
/// kept; this does not change the answer sets.
pub fn ground(p: &Program) -> Result<GroundProgram, SolveError> {
    if p.constants().is_empty() && p.rules().iter().any(|r| !r.is_ground()) {
        return Err(SolveError::EmptyUniverse);
    }

    let mut possible = LiteralIndex::new();
    loop {
        let mut changed = false;
        for rule in p.rules().iter().filter(|r| r.is_regular()) {
            for sigma in instances(rule, &possible) {
                for h in &rule.head {
                    changed |= possible.insert(h.substitute(&sigma));
                }
            }
        }
        if !changed {
            break;
        }
    }

    let atoms: Vec<ClassicalLiteral> = possible.iter().cloned().collect();
    let ids: HashMap<ClassicalLiteral, AtomId> =
        atoms.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();

    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for rule in p.rules() {
        let body = split_body(rule);
        for sigma in instances(rule, &possible) {
            let id = |l: &ClassicalLiteral| ids[&l.substitute(&sigma)];
            let counts = body
                .counts
                .iter()
                .map(|c| ground_count(&c.substitute(&sigma), &possible, &ids))
                .collect();
            let g = GroundRule {
                head: rule.head.iter().map(id).collect(),
                positive: body.positives.iter().map(|l| id(l)).collect(),
                negative: body
                    .negatives
                    .iter()
                    .filter_map(|l| ids.get(&l.substitute(&sigma)).copied())
                    .collect(),
                counts,
                kind: rule.kind,
            };
            if seen.insert(g.clone()) {
                rules.push(g);
            }
        }
    }
    Ok(GroundProgram { atoms, ids, rules })
}

fn ground_count(
    agg: &CountAggregate,
    possible: &LiteralIndex,
    ids: &HashMap<ClassicalLiteral, AtomId>,
) -> GroundCount {
    let mut elements = Vec::new();
    for cand in possible.candidates(&agg.pattern) {
        let mut local = Substitution::new();
        if match_into(&agg.pattern, cand, &mut local) {
            let tuple = agg.bound_vars.iter().map(|t| t.substitute(&local)).collect();
            elements.push((tuple, ids[cand]));
        }
    }
    elements.sort();
    GroundCount {
        elements,
        op: agg.op,
        guard: agg.guard.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn g(src: &str) -> GroundProgram {
        ground(&parse_program(src, "t").unwrap().value).unwrap()
    }

    #[test]
    fn simple_instantiation() {
        let gp = g("p(X) :- q(X).\nq(1).\nq(2).");
        let text = gp.to_string();
        assert!(text.contains("p(1) :- q(1)."));
        assert!(text.contains("p(2) :- q(2)."));
        assert_eq!(gp.rules().len(), 4);
    }

    #[test]
    fn fact_only_program_is_itself() {
        let gp = g("a.\nb(1).");
        assert_eq!(gp.to_string(), "a.\nb(1).\n");
    }

    #[test]
    fn empty_universe_rejected() {
        let p = parse_program("p(X) :- q(X).", "t").unwrap().value;
        assert!(matches!(ground(&p), Err(SolveError::EmptyUniverse)));
    }

    #[test]
    fn underivable_negation_dropped() {
        let gp = g("a :- not b.");
        assert_eq!(gp.to_string(), "a.\n");
    }

    #[test]
    fn comparisons_filter_instances() {
        let gp = g("e(1,2). e(3,2).\nu(X,Y) :- e(X,Y), X < Y.\nu(Y,X) :- e(X,Y), Y < X.");
        let us: Vec<_> = gp
            .rules()
            .iter()
            .filter(|r| r.head.len() == 1 && gp.atoms()[r.head[0]].predicate() == "u")
            .collect();
        assert_eq!(us.len(), 2);
        assert!(gp.atom_id(&parse_lit("u(1,2)")).is_some());
        assert!(gp.atom_id(&parse_lit("u(2,3)")).is_some());
    }

    fn parse_lit(s: &str) -> ClassicalLiteral {
        crate::parser::parse_atom_list(&format!("{s}.")).unwrap().remove(0)
    }
}
