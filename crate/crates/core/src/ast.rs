//! Abstract syntax for function-free disjunctive programs in the DLV dialect.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// A function-free term.
///
/// The derived ordering is the built-in comparison order: integers compare
/// numerically and sort before symbolic constants, which sort before
/// strings. Symbols and strings compare lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Sym(String),
    Str(String),
    Var(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Term::Sym(name.into())
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::Int(v)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Sym(s) | Term::Var(s) => f.write_str(s),
            Term::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            terms,
        }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(Term::is_ground)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.terms.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// An atom, possibly under strong negation (`-p(a)`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassicalLiteral {
    pub atom: Atom,
    pub strongly_negated: bool,
}

impl ClassicalLiteral {
    pub fn positive(atom: Atom) -> Self {
        ClassicalLiteral {
            atom,
            strongly_negated: false,
        }
    }

    pub fn negative(atom: Atom) -> Self {
        ClassicalLiteral {
            atom,
            strongly_negated: true,
        }
    }

    pub fn predicate(&self) -> &str {
        &self.atom.predicate
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn complement(&self) -> Self {
        ClassicalLiteral {
            atom: self.atom.clone(),
            strongly_negated: !self.strongly_negated,
        }
    }
}

impl fmt::Display for ClassicalLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strongly_negated {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CompareOp::Lt => ord == Ordering::Less,
            CompareOp::Le => ord != Ordering::Greater,
            CompareOp::Eq => ord == Ordering::Equal,
            CompareOp::Ne => ord != Ordering::Equal,
            CompareOp::Gt => ord == Ordering::Greater,
            CompareOp::Ge => ord != Ordering::Less,
        }
    }

    pub fn eval(self, left: &Term, right: &Term) -> bool {
        self.holds(left.cmp(right))
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flipped(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            op => op,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `#count{ V1,...,Vk : pattern } op guard`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountAggregate {
    pub bound_vars: Vec<Term>,
    pub pattern: ClassicalLiteral,
    pub op: CompareOp,
    pub guard: Term,
}

impl fmt::Display for CountAggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("#count{")?;
        for (i, v) in self.bound_vars.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ": {}}} {} {}", self.pattern, self.op, self.guard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyElement {
    Literal {
        literal: ClassicalLiteral,
        default_negated: bool,
    },
    Comparison {
        left: Term,
        op: CompareOp,
        right: Term,
    },
    Count(CountAggregate),
}

impl BodyElement {
    pub fn pos(literal: ClassicalLiteral) -> Self {
        BodyElement::Literal {
            literal,
            default_negated: false,
        }
    }

    pub fn naf(literal: ClassicalLiteral) -> Self {
        BodyElement::Literal {
            literal,
            default_negated: true,
        }
    }

    /// Positive (non-negated) classical literal, if this element is one.
    pub fn as_positive(&self) -> Option<&ClassicalLiteral> {
        match self {
            BodyElement::Literal {
                literal,
                default_negated: false,
            } => Some(literal),
            _ => None,
        }
    }
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Literal {
                literal,
                default_negated,
            } => {
                if *default_negated {
                    f.write_str("not ")?;
                }
                write!(f, "{literal}")
            }
            BodyElement::Comparison { left, op, right } => write!(f, "{left} {op} {right}"),
            BodyElement::Count(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Regular,
    Constraint,
    WeakConstraint { weight: u64, level: u64 },
}

impl RuleKind {
    pub const DEFAULT_WEAK: RuleKind = RuleKind::WeakConstraint {
        weight: 1,
        level: 1,
    };
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: Option<String>,
    pub head: Vec<ClassicalLiteral>,
    pub body: Vec<BodyElement>,
    pub kind: RuleKind,
    /// File path or test-statement locus the rule was read from.
    pub origin: String,
    pub ordinal: usize,
}

impl Rule {
    pub fn new(head: Vec<ClassicalLiteral>, body: Vec<BodyElement>, kind: RuleKind) -> Self {
        Rule {
            name: None,
            head,
            body,
            kind,
            origin: String::new(),
            ordinal: 0,
        }
    }

    pub fn fact(literal: ClassicalLiteral) -> Self {
        Rule::new(vec![literal], Vec::new(), RuleKind::Regular)
    }

    pub fn is_regular(&self) -> bool {
        self.kind == RuleKind::Regular
    }

    pub fn is_fact(&self) -> bool {
        self.is_regular() && self.body.is_empty() && self.head.len() == 1 && self.head[0].is_ground()
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &ClassicalLiteral> {
        self.body.iter().filter_map(BodyElement::as_positive)
    }

    pub fn head_predicates(&self) -> impl Iterator<Item = &str> {
        self.head.iter().map(ClassicalLiteral::predicate)
    }

    /// Predicates of every literal in the rule, aggregate patterns included.
    pub fn predicates(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.head_predicates().collect();
        for b in &self.body {
            match b {
                BodyElement::Literal { literal, .. } => {
                    out.insert(literal.predicate());
                }
                BodyElement::Count(c) => {
                    out.insert(c.pattern.predicate());
                }
                BodyElement::Comparison { .. } => {}
            }
        }
        out
    }

    /// Variables in order of first occurrence (head, then body left to right).
    pub fn variables(&self) -> Vec<&str> {
        fn push<'a>(t: &'a Term, seen: &mut Vec<&'a str>) {
            if let Term::Var(v) = t {
                if !seen.contains(&v.as_str()) {
                    seen.push(v);
                }
            }
        }
        let mut out: Vec<&str> = Vec::new();
        for l in &self.head {
            for t in &l.atom.terms {
                push(t, &mut out);
            }
        }
        for b in &self.body {
            match b {
                BodyElement::Literal { literal, .. } => {
                    for t in &literal.atom.terms {
                        push(t, &mut out);
                    }
                }
                BodyElement::Comparison { left, right, .. } => {
                    push(left, &mut out);
                    push(right, &mut out);
                }
                BodyElement::Count(c) => {
                    for t in &c.bound_vars {
                        push(t, &mut out);
                    }
                    for t in &c.pattern.atom.terms {
                        push(t, &mut out);
                    }
                    push(&c.guard, &mut out);
                }
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.variables().is_empty()
    }

    /// Variables that violate safety: occurring in the head, in a default-negated
    /// literal, in a comparison or in an aggregate guard without occurring in a
    /// positive non-aggregate body literal. Also reports aggregate bound variables
    /// missing from their pattern.
    pub fn unsafe_variables(&self) -> Vec<String> {
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        for l in self.positive_body() {
            for t in &l.atom.terms {
                if let Term::Var(v) = t {
                    bound.insert(v);
                }
            }
        }
        let mut bad: Vec<String> = Vec::new();
        let check = |t: &Term, bad: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v.as_str()) && !bad.iter().any(|b| b == v) {
                    bad.push(v.clone());
                }
            }
        };
        for l in &self.head {
            for t in &l.atom.terms {
                check(t, &mut bad);
            }
        }
        for b in &self.body {
            match b {
                BodyElement::Literal {
                    literal,
                    default_negated: true,
                } => {
                    for t in &literal.atom.terms {
                        check(t, &mut bad);
                    }
                }
                BodyElement::Literal { .. } => {}
                BodyElement::Comparison { left, right, .. } => {
                    check(left, &mut bad);
                    check(right, &mut bad);
                }
                BodyElement::Count(c) => {
                    check(&c.guard, &mut bad);
                    for v in &c.bound_vars {
                        if let Term::Var(name) = v {
                            let in_pattern = c.pattern.atom.terms.iter().any(|t| t == v);
                            if !in_pattern && !bound.contains(name.as_str()) && !bad.contains(name)
                            {
                                bad.push(name.clone());
                            }
                        }
                    }
                }
            }
        }
        bad
    }
}

impl fmt::Display for Rule {
    /// DLV syntax, without the name comment.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_body = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
            Ok(())
        };
        match self.kind {
            RuleKind::Regular => {
                for (i, h) in self.head.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{h}")?;
                }
                if !self.body.is_empty() {
                    f.write_str(" :- ")?;
                    write_body(f)?;
                }
                f.write_str(".")
            }
            RuleKind::Constraint => {
                f.write_str(":- ")?;
                write_body(f)?;
                f.write_str(".")
            }
            RuleKind::WeakConstraint { weight, level } => {
                f.write_str(":~ ")?;
                write_body(f)?;
                write!(f, ". [{weight}:{level}]")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("duplicate rule name `{0}`")]
pub struct DuplicateRuleName(pub String);

/// An ordered collection of rules with unique rule names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    rules: Vec<Rule>,
    name_index: HashMap<String, usize>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Result<Self, DuplicateRuleName> {
        let mut p = Program::new();
        for r in rules {
            p.push(r)?;
        }
        Ok(p)
    }

    pub fn push(&mut self, rule: Rule) -> Result<(), DuplicateRuleName> {
        if let Some(name) = &rule.name {
            if self.name_index.contains_key(name) {
                return Err(DuplicateRuleName(name.clone()));
            }
            self.name_index.insert(name.clone(), self.rules.len());
        }
        self.rules.push(rule);
        Ok(())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule_named(&self, name: &str) -> Option<&Rule> {
        self.name_index.get(name).map(|&i| &self.rules[i])
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.rules.iter().flat_map(|r| r.predicates()).collect()
    }

    /// All ground terms occurring anywhere in the program.
    pub fn constants(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        let mut add = |t: &Term| {
            if t.is_ground() {
                out.insert(t.clone());
            }
        };
        for r in &self.rules {
            for l in &r.head {
                l.atom.terms.iter().for_each(&mut add);
            }
            for b in &r.body {
                match b {
                    BodyElement::Literal { literal, .. } => literal.atom.terms.iter().for_each(&mut add),
                    BodyElement::Comparison { left, right, .. } => {
                        add(left);
                        add(right);
                    }
                    BodyElement::Count(c) => {
                        c.pattern.atom.terms.iter().for_each(&mut add);
                        c.bound_vars.iter().for_each(&mut add);
                        add(&c.guard);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(p: &str, terms: Vec<Term>) -> ClassicalLiteral {
        ClassicalLiteral::positive(Atom::new(p, terms))
    }

    #[test]
    fn term_order_puts_integers_first() {
        assert!(Term::Int(10) < Term::Int(11));
        assert!(Term::Int(1000) < Term::sym("a"));
        assert!(Term::sym("a") < Term::sym("b"));
        assert!(Term::sym("zzz") < Term::Str("a".into()));
    }

    #[test]
    fn strong_negation_renders_with_prefix() {
        let l = ClassicalLiteral::negative(Atom::new("p", vec![Term::sym("a")]));
        assert_eq!(l.to_string(), "-p(a)");
        assert_ne!(l, l.complement());
    }

    #[test]
    fn fact_detection() {
        assert!(Rule::fact(lit("node", vec![Term::Int(1)])).is_fact());
        assert!(!Rule::fact(lit("node", vec![Term::var("X")])).is_fact());
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut a = Rule::fact(lit("a", vec![]));
        a.name = Some("r1".into());
        let b = a.clone();
        assert_eq!(
            Program::from_rules([a, b]).unwrap_err(),
            DuplicateRuleName("r1".into())
        );
    }

    #[test]
    fn safety_flags_negative_only_variable() {
        let r = Rule::new(
            vec![lit("p", vec![Term::var("X")])],
            vec![BodyElement::naf(lit("q", vec![Term::var("X")]))],
            RuleKind::Regular,
        );
        assert_eq!(r.unsafe_variables(), vec!["X".to_string()]);
    }

    #[test]
    fn variables_in_first_occurrence_order() {
        let r = Rule::new(
            vec![lit("p", vec![Term::var("Y"), Term::var("X")])],
            vec![BodyElement::pos(lit("q", vec![Term::var("X"), Term::var("Z")]))],
            RuleKind::Regular,
        );
        assert_eq!(r.variables(), vec!["Y", "X", "Z"]);
    }
}
