//! Substitutions, one-way matching and alpha-equivalence of rules.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::ast::{
    Atom, BodyElement, ClassicalLiteral, CompareOp, CountAggregate, Rule, RuleKind, Term,
};

/// A finite map from variable names to ground terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, value: Term) -> Option<Term> {
        self.0.insert(var.into(), value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Binds `var` to `value`, or checks consistency with an existing binding.
    fn bind(&mut self, var: &str, value: &Term) -> bool {
        match self.0.get(var) {
            Some(existing) => existing == value,
            None => {
                self.0.insert(var.to_string(), value.clone());
                true
            }
        }
    }
}

impl<K: Into<String>> FromIterator<(K, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (K, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

/// Matches `pattern` against the ground literal `fact`.
///
/// Predicate, arity and strong negation must agree, and repeated pattern
/// variables must bind to the same term.
pub fn match_atom(pattern: &ClassicalLiteral, fact: &ClassicalLiteral) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, fact, &mut sigma).then_some(sigma)
}

/// Extends `sigma` so that `pattern` instantiates to `fact`. On failure
/// `sigma` may hold partial bindings; callers clone before trying.
pub fn match_into(pattern: &ClassicalLiteral, fact: &ClassicalLiteral, sigma: &mut Substitution) -> bool {
    if pattern.strongly_negated != fact.strongly_negated
        || pattern.atom.predicate != fact.atom.predicate
        || pattern.atom.terms.len() != fact.atom.terms.len()
    {
        return false;
    }
    pattern
        .atom
        .terms
        .iter()
        .zip(&fact.atom.terms)
        .all(|(p, f)| match p {
            Term::Var(v) => sigma.bind(v, f),
            _ => p == f,
        })
}

/// Structure-preserving replacement of variables.
pub trait Substitute: Sized {
    fn substitute(&self, sigma: &Substitution) -> Self;
}

/// Applies `sigma` to any rule fragment.
pub fn apply_substitution<T: Substitute>(element: &T, sigma: &Substitution) -> T {
    element.substitute(sigma)
}

impl Substitute for Term {
    fn substitute(&self, sigma: &Substitution) -> Self {
        match self {
            Term::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| self.clone()),
            _ => self.clone(),
        }
    }
}

impl Substitute for Atom {
    fn substitute(&self, sigma: &Substitution) -> Self {
        Atom {
            predicate: self.predicate.clone(),
            terms: self.terms.iter().map(|t| t.substitute(sigma)).collect(),
        }
    }
}

impl Substitute for ClassicalLiteral {
    fn substitute(&self, sigma: &Substitution) -> Self {
        ClassicalLiteral {
            atom: self.atom.substitute(sigma),
            strongly_negated: self.strongly_negated,
        }
    }
}

impl Substitute for CountAggregate {
    fn substitute(&self, sigma: &Substitution) -> Self {
        CountAggregate {
            bound_vars: self.bound_vars.iter().map(|t| t.substitute(sigma)).collect(),
            pattern: self.pattern.substitute(sigma),
            op: self.op,
            guard: self.guard.substitute(sigma),
        }
    }
}

impl Substitute for BodyElement {
    fn substitute(&self, sigma: &Substitution) -> Self {
        match self {
            BodyElement::Literal {
                literal,
                default_negated,
            } => BodyElement::Literal {
                literal: literal.substitute(sigma),
                default_negated: *default_negated,
            },
            BodyElement::Comparison { left, op, right } => BodyElement::Comparison {
                left: left.substitute(sigma),
                op: *op,
                right: right.substitute(sigma),
            },
            BodyElement::Count(c) => BodyElement::Count(c.substitute(sigma)),
        }
    }
}

impl Substitute for Rule {
    fn substitute(&self, sigma: &Substitution) -> Self {
        Rule {
            name: self.name.clone(),
            head: self.head.iter().map(|l| l.substitute(sigma)).collect(),
            body: self.body.iter().map(|b| b.substitute(sigma)).collect(),
            kind: self.kind,
            origin: self.origin.clone(),
            ordinal: self.ordinal,
        }
    }
}

/// The rule's structure with variables renamed `V0, V1, ...` by first
/// occurrence. Name, origin and ordinal are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalRule {
    head: Vec<ClassicalLiteral>,
    body: Vec<BodyElement>,
    kind: RuleKind,
}

pub fn canonical_form(rule: &Rule) -> CanonicalRule {
    let renaming: Substitution = rule
        .variables()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v.to_string(), Term::Var(format!("V{i}"))))
        .collect();
    let renamed = rule.substitute(&renaming);
    CanonicalRule {
        head: renamed.head,
        body: renamed.body,
        kind: renamed.kind,
    }
}

/// True iff the rules are identical up to a consistent variable renaming,
/// ignoring name, origin and ordinal.
pub fn alpha_equal(a: &Rule, b: &Rule) -> bool {
    canonical_form(a) == canonical_form(b)
}

/// Ground literals grouped by (predicate, arity, strong negation) for joins.
#[derive(Debug, Default, Clone)]
pub struct LiteralIndex {
    by_key: HashMap<(String, usize, bool), Vec<ClassicalLiteral>>,
    all: BTreeSet<ClassicalLiteral>,
}

impl LiteralIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, l: ClassicalLiteral) -> bool {
        if self.all.contains(&l) {
            return false;
        }
        self.by_key
            .entry((l.atom.predicate.clone(), l.atom.arity(), l.strongly_negated))
            .or_default()
            .push(l.clone());
        self.all.insert(l);
        true
    }

    pub fn contains(&self, l: &ClassicalLiteral) -> bool {
        self.all.contains(l)
    }

    pub fn candidates(&self, pattern: &ClassicalLiteral) -> &[ClassicalLiteral] {
        self.by_key
            .get(&(
                pattern.atom.predicate.clone(),
                pattern.atom.arity(),
                pattern.strongly_negated,
            ))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassicalLiteral> {
        self.all.iter()
    }
}

impl FromIterator<ClassicalLiteral> for LiteralIndex {
    fn from_iter<I: IntoIterator<Item = ClassicalLiteral>>(iter: I) -> Self {
        let mut idx = LiteralIndex::new();
        for l in iter {
            idx.insert(l);
        }
        idx
    }
}

/// A comparison that can be checked once both sides are ground.
fn comparison_status(left: &Term, op: CompareOp, right: &Term, sigma: &Substitution) -> Option<bool> {
    let l = left.substitute(sigma);
    let r = right.substitute(sigma);
    (l.is_ground() && r.is_ground()).then(|| op.eval(&l, &r))
}

/// Every extension of `seed` under which all positive literals of `positives`
/// match some literal of `index` and every comparison holds. Comparisons are
/// checked as soon as their variables are bound.
pub fn join(
    positives: &[&ClassicalLiteral],
    comparisons: &[(&Term, CompareOp, &Term)],
    index: &LiteralIndex,
    seed: Substitution,
) -> Vec<Substitution> {
    let mut out = Vec::new();
    join_rec(positives, comparisons, index, seed, &mut out);
    out
}

fn join_rec(
    positives: &[&ClassicalLiteral],
    comparisons: &[(&Term, CompareOp, &Term)],
    index: &LiteralIndex,
    sigma: Substitution,
    out: &mut Vec<Substitution>,
) {
    for (l, op, r) in comparisons {
        if comparison_status(l, *op, r, &sigma) == Some(false) {
            return;
        }
    }
    let Some((first, rest)) = positives.split_first() else {
        if comparisons
            .iter()
            .all(|(l, op, r)| comparison_status(l, *op, r, &sigma) == Some(true))
        {
            out.push(sigma);
        }
        return;
    };
    let pattern = first.substitute(&sigma);
    if pattern.is_ground() {
        if index.contains(&pattern) {
            join_rec(rest, comparisons, index, sigma, out);
        }
        return;
    }
    for cand in index.candidates(&pattern) {
        let mut next = sigma.clone();
        if match_into(&pattern, cand, &mut next) {
            join_rec(rest, comparisons, index, next, out);
        }
    }
}

/// Counts distinct instantiations of the aggregate's bound terms whose
/// pattern instance belongs to `index`. The aggregate must not contain
/// variables other than its local ones.
pub fn count_aggregate(agg: &CountAggregate, index: &LiteralIndex) -> usize {
    let mut tuples: BTreeSet<Vec<Term>> = BTreeSet::new();
    for cand in index.candidates(&agg.pattern) {
        let mut sigma = Substitution::new();
        if match_into(&agg.pattern, cand, &mut sigma) {
            tuples.insert(agg.bound_vars.iter().map(|t| t.substitute(&sigma)).collect());
        }
    }
    tuples.len()
}
