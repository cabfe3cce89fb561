//! The test-suite language: invocation, inputs, test cases and assertions.
//!
//! ```text
//! invocation("MaximalClique", "/usr/bin/dlv", "");
//! inputFile("clique.dl");
//! guessClique(SPLIT_PROGRAM) {
//!     selectRule("r1");
//!     assertFalseInAtMost(1, "inClique(X).");
//! }
//! assertBestModelCost(3);
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::analysis::check_selection_compatibility;
use crate::ast::{ClassicalLiteral, Program, Rule, RuleKind};
use crate::diag::{Diagnostics, ParseDiagnostic, Parsed};
use crate::parser::lexer::{lex, Tok, Token};
use crate::parser::{merge_programs, parse_atom_list, parse_program, Cursor};

/// Name of the implicit case that carries suite-level assertions.
pub const GLOBAL_CASE: &str = "__global__";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputSpec {
    Inline(String),
    File(String),
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Inline(t) => write!(f, "input({})", quote(t)),
            InputSpec::File(p) => write!(f, "inputFile({})", quote(p)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    SelectedRules,
    SplitProgram,
    #[default]
    WholeProgram,
}

impl Mode {
    pub fn keyword(self) -> &'static str {
        match self {
            Mode::SelectedRules => "SELECTED_RULES",
            Mode::SplitProgram => "SPLIT_PROGRAM",
            Mode::WholeProgram => "PROGRAM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterPolarity {
    Filter,
    PFilter,
    NFilter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterScope {
    Predicates(Vec<String>),
    SelectedRules,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSpec {
    pub polarity: FilterPolarity,
    pub scope: FilterScope,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assertion {
    TrueAll(Vec<ClassicalLiteral>),
    TrueBrave(Vec<ClassicalLiteral>),
    TrueIn(u64, Vec<ClassicalLiteral>),
    TrueInAtLeast(u64, Vec<ClassicalLiteral>),
    TrueInAtMost(u64, Vec<ClassicalLiteral>),
    FalseAll(Vec<ClassicalLiteral>),
    FalseBrave(Vec<ClassicalLiteral>),
    FalseIn(u64, Vec<ClassicalLiteral>),
    FalseInAtLeast(u64, Vec<ClassicalLiteral>),
    FalseInAtMost(u64, Vec<ClassicalLiteral>),
    ConstraintAll(Rule),
    ConstraintIn(u64, Rule),
    ConstraintInAtLeast(u64, Rule),
    ConstraintInAtMost(u64, Rule),
    BestModelCost { cost: u64, level: u64 },
}

#[derive(Clone, Copy)]
enum ArgShape {
    Atoms,
    CountedAtoms,
    Constraint,
    CountedConstraint,
    Cost,
}

/// Statement name, shape, and whether it is the canonical spelling.
const ASSERTIONS: &[(&str, ArgShape)] = &[
    ("assertTrue", ArgShape::Atoms),
    ("assertCautiouslyTrue", ArgShape::Atoms),
    ("assertBravelyTrue", ArgShape::Atoms),
    ("assertTrueIn", ArgShape::CountedAtoms),
    ("assertTrueInAtLeast", ArgShape::CountedAtoms),
    ("assertTrueInAtMost", ArgShape::CountedAtoms),
    ("assertFalse", ArgShape::Atoms),
    ("assertCautiouslyFalse", ArgShape::Atoms),
    ("assertBravelyFalse", ArgShape::Atoms),
    ("assertFalseIn", ArgShape::CountedAtoms),
    ("assertFalseInAtLeast", ArgShape::CountedAtoms),
    ("assertFalseInAtMost", ArgShape::CountedAtoms),
    ("assertConstraint", ArgShape::Constraint),
    ("assertConstraintIn", ArgShape::CountedConstraint),
    ("assertConstraintInAtLeast", ArgShape::CountedConstraint),
    ("assertConstraintInAtMost", ArgShape::CountedConstraint),
    ("assertBestModelCost", ArgShape::Cost),
];

impl Assertion {
    /// Canonical statement name. Aliases map to one name, e.g.
    /// `assertCautiouslyTrue` reports as `assertTrue`.
    pub fn kind(&self) -> &'static str {
        match self {
            Assertion::TrueAll(_) => "assertTrue",
            Assertion::TrueBrave(_) => "assertBravelyTrue",
            Assertion::TrueIn(..) => "assertTrueIn",
            Assertion::TrueInAtLeast(..) => "assertTrueInAtLeast",
            Assertion::TrueInAtMost(..) => "assertTrueInAtMost",
            Assertion::FalseAll(_) => "assertFalse",
            Assertion::FalseBrave(_) => "assertBravelyFalse",
            Assertion::FalseIn(..) => "assertFalseIn",
            Assertion::FalseInAtLeast(..) => "assertFalseInAtLeast",
            Assertion::FalseInAtMost(..) => "assertFalseInAtMost",
            Assertion::ConstraintAll(_) => "assertConstraint",
            Assertion::ConstraintIn(..) => "assertConstraintIn",
            Assertion::ConstraintInAtLeast(..) => "assertConstraintInAtLeast",
            Assertion::ConstraintInAtMost(..) => "assertConstraintInAtMost",
            Assertion::BestModelCost { .. } => "assertBestModelCost",
        }
    }

    /// Literals an atom assertion talks about.
    pub fn atoms(&self) -> Option<&[ClassicalLiteral]> {
        match self {
            Assertion::TrueAll(a)
            | Assertion::TrueBrave(a)
            | Assertion::TrueIn(_, a)
            | Assertion::TrueInAtLeast(_, a)
            | Assertion::TrueInAtMost(_, a)
            | Assertion::FalseAll(a)
            | Assertion::FalseBrave(a)
            | Assertion::FalseIn(_, a)
            | Assertion::FalseInAtLeast(_, a)
            | Assertion::FalseInAtMost(_, a) => Some(a),
            _ => None,
        }
    }

    fn build(name: &str, n: Option<u64>, atoms: Vec<ClassicalLiteral>) -> Assertion {
        let n = n.unwrap_or(0);
        match name {
            "assertTrue" | "assertCautiouslyTrue" => Assertion::TrueAll(atoms),
            "assertBravelyTrue" => Assertion::TrueBrave(atoms),
            "assertTrueIn" => Assertion::TrueIn(n, atoms),
            "assertTrueInAtLeast" => Assertion::TrueInAtLeast(n, atoms),
            "assertTrueInAtMost" => Assertion::TrueInAtMost(n, atoms),
            "assertFalse" | "assertCautiouslyFalse" => Assertion::FalseAll(atoms),
            "assertBravelyFalse" => Assertion::FalseBrave(atoms),
            "assertFalseIn" => Assertion::FalseIn(n, atoms),
            "assertFalseInAtLeast" => Assertion::FalseInAtLeast(n, atoms),
            "assertFalseInAtMost" => Assertion::FalseInAtMost(n, atoms),
            _ => unreachable!("not an atom assertion: {name}"),
        }
    }

    fn build_constraint(name: &str, n: Option<u64>, c: Rule) -> Assertion {
        let n = n.unwrap_or(0);
        match name {
            "assertConstraint" => Assertion::ConstraintAll(c),
            "assertConstraintIn" => Assertion::ConstraintIn(n, c),
            "assertConstraintInAtLeast" => Assertion::ConstraintInAtLeast(n, c),
            "assertConstraintInAtMost" => Assertion::ConstraintInAtMost(n, c),
            _ => unreachable!("not a constraint assertion: {name}"),
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(ch),
        }
    }
    out.push('"');
    out
}

pub fn render_atom_list(atoms: &[ClassicalLiteral]) -> String {
    atoms.iter().map(|a| format!("{a}.")).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.kind();
        match self {
            Assertion::TrueAll(a) | Assertion::TrueBrave(a) | Assertion::FalseAll(a) | Assertion::FalseBrave(a) => {
                write!(f, "{name}({})", quote(&render_atom_list(a)))
            }
            Assertion::TrueIn(n, a)
            | Assertion::TrueInAtLeast(n, a)
            | Assertion::TrueInAtMost(n, a)
            | Assertion::FalseIn(n, a)
            | Assertion::FalseInAtLeast(n, a)
            | Assertion::FalseInAtMost(n, a) => write!(f, "{name}({n}, {})", quote(&render_atom_list(a))),
            Assertion::ConstraintAll(c) => write!(f, "{name}({})", quote(&c.to_string())),
            Assertion::ConstraintIn(n, c) | Assertion::ConstraintInAtLeast(n, c) | Assertion::ConstraintInAtMost(n, c) => {
                write!(f, "{name}({n}, {})", quote(&c.to_string()))
            }
            Assertion::BestModelCost { cost, level } => write!(f, "{name}({cost}, {level})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestCase {
    pub name: String,
    pub mode: Mode,
    pub new_options: Option<String>,
    pub local_inputs: Vec<InputSpec>,
    pub exclusions: Vec<InputSpec>,
    pub filter: Option<FilterSpec>,
    pub selected_rule_names: Vec<String>,
    pub assertions: Vec<Assertion>,
    /// Position of the case header in the suite file.
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestSuite {
    pub invocation_name: String,
    pub solver_path: Option<String>,
    pub solver_options: Option<String>,
    pub global_inputs: Vec<InputSpec>,
    pub test_cases: Vec<TestCase>,
    pub global_assertions: Vec<Assertion>,
}

impl TestSuite {
    /// Test cases in execution order, with the implicit global case last
    /// when there are suite-level assertions.
    pub fn all_cases(&self) -> Vec<TestCase> {
        let mut cases = self.test_cases.clone();
        if !self.global_assertions.is_empty() {
            cases.push(TestCase {
                name: GLOBAL_CASE.to_string(),
                assertions: self.global_assertions.clone(),
                ..TestCase::default()
            });
        }
        cases
    }

    /// Every distinct input referenced anywhere in the suite.
    pub fn referenced_inputs(&self) -> BTreeSet<&InputSpec> {
        self.global_inputs
            .iter()
            .chain(self.test_cases.iter().flat_map(|c| c.local_inputs.iter().chain(&c.exclusions)))
            .collect()
    }
}

type SResult<T> = Result<T, ParseDiagnostic>;

#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
enum Phase {
    Inputs,
    Cases,
    GlobalAssertions,
}

struct SuiteParser<'a> {
    c: Cursor<'a>,
    origin: &'a str,
    diags: Vec<ParseDiagnostic>,
}

impl<'a> SuiteParser<'a> {
    fn err<T>(&self, t: &Token, message: impl Into<String>) -> SResult<T> {
        Err(ParseDiagnostic::error(self.origin, t.line, t.col, message))
    }

    fn expect(&mut self, tok: Tok, context: &str) -> SResult<()> {
        if self.c.eat(&tok) {
            return Ok(());
        }
        let t = self.c.token().clone();
        self.err(&t, format!("expected {} {context}, found {}", tok.describe(), t.tok.describe()))
    }

    fn string(&mut self, context: &str) -> SResult<(String, Token)> {
        let t = self.c.token().clone();
        match &t.tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.c.bump();
                Ok((s, t))
            }
            other => self.err(&t, format!("expected string literal {context}, found {}", other.describe())),
        }
    }

    fn integer(&mut self, context: &str) -> SResult<u64> {
        let t = self.c.token().clone();
        match t.tok {
            Tok::Int(v) if v >= 0 => {
                self.c.bump();
                Ok(v as u64)
            }
            ref other => self.err(&t, format!("expected non-negative integer {context}, found {}", other.describe())),
        }
    }

    fn name_or_string(&mut self, context: &str) -> SResult<String> {
        let t = self.c.token().clone();
        match &t.tok {
            Tok::Str(s) | Tok::Ident(s) => {
                let s = s.clone();
                self.c.bump();
                Ok(s)
            }
            other => self.err(&t, format!("expected name {context}, found {}", other.describe())),
        }
    }

    /// Skips to just past the next `;`, or up to a `}` or the end.
    fn recover(&mut self) {
        loop {
            match self.c.peek() {
                Tok::Eof | Tok::RBrace => return,
                Tok::Semicolon => {
                    self.c.bump();
                    return;
                }
                _ => {
                    self.c.bump();
                }
            }
        }
    }

    fn inline_program(&mut self, text: &str, at: &Token) {
        if let Err(d) = parse_program(text, "inline input") {
            for e in d.errors() {
                self.diags.push(ParseDiagnostic::error(
                    self.origin,
                    at.line,
                    at.col,
                    format!("invalid inline program ({}:{}): {}", e.line, e.column, e.message),
                ));
            }
        }
    }

    fn input_statement(&mut self, keyword: &str) -> SResult<InputSpec> {
        self.expect(Tok::LParen, &format!("after `{keyword}`"))?;
        let (text, at) = self.string(&format!("in `{keyword}`"))?;
        self.expect(Tok::RParen, &format!("to close `{keyword}`"))?;
        self.expect(Tok::Semicolon, &format!("after `{keyword}(...)`"))?;
        Ok(match keyword {
            "input" | "excludeInput" => {
                self.inline_program(&text, &at);
                InputSpec::Inline(text)
            }
            _ => InputSpec::File(text),
        })
    }

    fn invocation(&mut self, suite: &mut TestSuite) -> SResult<()> {
        self.expect(Tok::LParen, "after `invocation`")?;
        suite.invocation_name = self.string("as invocation name")?.0;
        if self.c.eat(&Tok::Comma) {
            suite.solver_path = Some(self.string("as solver path")?.0).filter(|s| !s.is_empty());
            if self.c.eat(&Tok::Comma) {
                suite.solver_options = Some(self.string("as solver options")?.0).filter(|s| !s.trim().is_empty());
            }
        }
        self.expect(Tok::RParen, "to close `invocation`")?;
        self.expect(Tok::Semicolon, "after `invocation(...)`")
    }

    fn assertion(&mut self, name: &str, at: &Token) -> SResult<Assertion> {
        let Some(&(_, shape)) = ASSERTIONS.iter().find(|(n, _)| *n == name) else {
            return self.err(at, format!("unknown assertion {name}"));
        };
        self.expect(Tok::LParen, &format!("after `{name}`"))?;
        let result = match shape {
            ArgShape::Cost => {
                let cost = self.integer("as cost")?;
                let level = if self.c.eat(&Tok::Comma) {
                    let lt = self.c.token().clone();
                    let l = self.integer("as level")?;
                    if l == 0 {
                        return self.err(&lt, "weak-constraint levels start at 1");
                    }
                    l
                } else {
                    1
                };
                Assertion::BestModelCost { cost, level }
            }
            _ => {
                let counted = matches!(shape, ArgShape::CountedAtoms | ArgShape::CountedConstraint);
                let n = if counted {
                    let n = self.integer(&format!("as answer-set count of `{name}`"))?;
                    self.expect(Tok::Comma, "after answer-set count")?;
                    Some(n)
                } else {
                    None
                };
                let (text, st) = self.string(&format!("as argument of `{name}`"))?;
                match shape {
                    ArgShape::Atoms | ArgShape::CountedAtoms => {
                        let atoms = parse_atom_list(&text).map_err(|d| self.nested(&st, "atom list", &d))?;
                        Assertion::build(name, n, atoms)
                    }
                    _ => Assertion::build_constraint(name, n, self.constraint(&text, &st)?),
                }
            }
        };
        self.expect(Tok::RParen, &format!("to close `{name}`"))?;
        self.expect(Tok::Semicolon, &format!("after `{name}(...)`"))?;
        Ok(result)
    }

    fn nested(&self, at: &Token, what: &str, d: &Diagnostics) -> ParseDiagnostic {
        let e = d.errors().next().or(d.iter().next());
        let msg = match e {
            Some(e) => format!("invalid {what} ({}:{}): {}", e.line, e.column, e.message),
            None => format!("invalid {what}"),
        };
        ParseDiagnostic::error(self.origin, at.line, at.col, msg)
    }

    fn constraint(&self, text: &str, at: &Token) -> SResult<Rule> {
        let p = parse_program(text, "assertion").map_err(|d| self.nested(at, "constraint", &d))?;
        let mut rules = p.value.into_rules();
        if rules.len() != 1 || rules[0].kind != RuleKind::Constraint {
            return self.err(at, "assertion constraint must be exactly one rule of the form `:- body.`");
        }
        let mut r = rules.remove(0);
        r.origin = String::new();
        Ok(r)
    }

    fn filter(&mut self, polarity: FilterPolarity, keyword: &str) -> SResult<FilterSpec> {
        let parenthesized = self.c.eat(&Tok::LParen);
        let scope = if matches!(self.c.peek(), Tok::Ident(s) if s == "SELECTED_RULES") {
            self.c.bump();
            FilterScope::SelectedRules
        } else if parenthesized {
            let mut names = vec![self.name_or_string(&format!("in `{keyword}`"))?];
            while self.c.eat(&Tok::Comma) {
                names.push(self.name_or_string(&format!("in `{keyword}`"))?);
            }
            FilterScope::Predicates(names)
        } else {
            let t = self.c.token().clone();
            return self.err(&t, format!("expected `(` or SELECTED_RULES after `{keyword}`"));
        };
        if parenthesized {
            self.expect(Tok::RParen, &format!("to close `{keyword}`"))?;
        }
        self.expect(Tok::Semicolon, &format!("after `{keyword}`"))?;
        Ok(FilterSpec { polarity, scope })
    }

    fn case_statement(&mut self, case: &mut TestCase) -> SResult<()> {
        let t = self.c.bump().clone();
        let Tok::Ident(word) = &t.tok else {
            return self.err(&t, format!("expected statement, found {}", t.tok.describe()));
        };
        match word.as_str() {
            "newOptions" => {
                if case.new_options.is_some() {
                    return self.err(&t, "newOptions given twice");
                }
                self.expect(Tok::LParen, "after `newOptions`")?;
                case.new_options = Some(self.string("in `newOptions`")?.0);
                self.expect(Tok::RParen, "to close `newOptions`")?;
                self.expect(Tok::Semicolon, "after `newOptions(...)`")?;
            }
            "input" | "inputFile" => case.local_inputs.push(self.input_statement(word)?),
            "excludeInput" | "excludeInputFile" => case.exclusions.push(self.input_statement(word)?),
            "filter" | "pfilter" | "nfilter" => {
                let polarity = match word.as_str() {
                    "filter" => FilterPolarity::Filter,
                    "pfilter" => FilterPolarity::PFilter,
                    _ => FilterPolarity::NFilter,
                };
                if case.filter.is_some() {
                    return self.err(&t, "a test case takes at most one filter statement");
                }
                case.filter = Some(self.filter(polarity, word)?);
            }
            "selectRule" => {
                self.expect(Tok::LParen, "after `selectRule`")?;
                let name = self.name_or_string("in `selectRule`")?;
                self.expect(Tok::RParen, "to close `selectRule`")?;
                self.expect(Tok::Semicolon, "after `selectRule(...)`")?;
                case.selected_rule_names.push(name);
            }
            w if w.starts_with("assert") => case.assertions.push(self.assertion(w, &t)?),
            w => return self.err(&t, format!("unknown statement `{w}` in test case")),
        }
        Ok(())
    }

    fn test_case(&mut self, name: String, at: &Token) -> SResult<TestCase> {
        self.expect(Tok::LParen, "after test case name")?;
        let mode = match self.c.peek().clone() {
            Tok::RParen => Mode::WholeProgram,
            Tok::Ident(m) => {
                let mt = self.c.bump().clone();
                match m.as_str() {
                    "SELECTED_RULES" => Mode::SelectedRules,
                    "SPLIT_PROGRAM" => Mode::SplitProgram,
                    "PROGRAM" => Mode::WholeProgram,
                    other => {
                        return self.err(
                            &mt,
                            format!("unknown execution mode {other}; expected SELECTED_RULES, SPLIT_PROGRAM or PROGRAM"),
                        )
                    }
                }
            }
            other => {
                let t = self.c.token().clone();
                return self.err(&t, format!("expected execution mode, found {}", other.describe()));
            }
        };
        self.expect(Tok::RParen, "after execution mode")?;
        self.expect(Tok::LBrace, "to open test case body")?;
        let mut case = TestCase {
            name,
            mode,
            line: at.line,
            column: at.col,
            ..TestCase::default()
        };
        while !matches!(self.c.peek(), Tok::RBrace | Tok::Eof) {
            if let Err(d) = self.case_statement(&mut case) {
                self.diags.push(d);
                self.recover();
            }
        }
        self.expect(Tok::RBrace, &format!("to close test case {}", case.name))?;
        self.c.eat(&Tok::Semicolon);
        if case.mode != Mode::WholeProgram && case.selected_rule_names.is_empty() {
            self.diags.push(ParseDiagnostic::error(
                self.origin,
                at.line,
                at.col,
                format!("test case {} runs in {} mode but selects no rules", case.name, case.mode.keyword()),
            ));
        }
        Ok(case)
    }

    fn is_case_header(&self) -> bool {
        matches!(
            (self.c.peek(), self.c.peek_at(1), self.c.peek_at(2), self.c.peek_at(3)),
            (Tok::Ident(_), Tok::LParen, Tok::RParen, Tok::LBrace) | (Tok::Ident(_), Tok::LParen, Tok::Ident(_), Tok::RParen)
        )
    }

    fn suite(&mut self) -> TestSuite {
        let mut suite = TestSuite::default();
        let mut phase = Phase::Inputs;
        let mut seen_invocation = false;
        let mut names = BTreeSet::new();

        while !self.c.at_eof() {
            let t = self.c.token().clone();
            let step: SResult<()> = (|| {
                let word = match &t.tok {
                    Tok::Ident(w) => w.clone(),
                    Tok::RBrace => {
                        self.c.bump();
                        return self.err(&t, "unmatched `}`");
                    }
                    other => return self.err(&t, format!("expected statement, found {}", other.describe())),
                };
                if !seen_invocation && word != "invocation" {
                    seen_invocation = true;
                    self.diags.push(ParseDiagnostic::error(
                        self.origin,
                        t.line,
                        t.col,
                        "missing invocation statement; a suite must start with invocation(...)",
                    ));
                }
                if word == "invocation" {
                    self.c.bump();
                    if seen_invocation {
                        return self.err(&t, "duplicate invocation statement");
                    }
                    seen_invocation = true;
                    return self.invocation(&mut suite);
                }
                if self.is_case_header() {
                    self.c.bump();
                    if phase == Phase::GlobalAssertions {
                        return self.err(&t, format!("test case {word} appears after global assertions"));
                    }
                    phase = Phase::Cases;
                    let case = self.test_case(word.clone(), &t)?;
                    if !names.insert(word.clone()) || word == GLOBAL_CASE {
                        return self.err(&t, format!("duplicate test case name {word}"));
                    }
                    suite.test_cases.push(case);
                    return Ok(());
                }
                self.c.bump();
                match word.as_str() {
                    "input" | "inputFile" => {
                        if phase != Phase::Inputs {
                            return self.err(&t, "global inputs must precede test cases and global assertions");
                        }
                        let spec = self.input_statement(&word)?;
                        suite.global_inputs.push(spec);
                        Ok(())
                    }
                    w if w.starts_with("assert") => {
                        phase = Phase::GlobalAssertions;
                        let a = self.assertion(w, &t)?;
                        suite.global_assertions.push(a);
                        Ok(())
                    }
                    w => self.err(&t, format!("unknown statement `{w}`")),
                }
            })();
            if let Err(d) = step {
                self.diags.push(d);
                self.recover();
                if matches!(self.c.peek(), Tok::RBrace) {
                    self.c.bump();
                }
            }
        }
        if !seen_invocation {
            self.diags.push(ParseDiagnostic::error(self.origin, 1, 1, "missing invocation statement"));
        }
        suite
    }
}

/// Parses a test-suite file. `%` and `//` start line comments.
pub fn parse_test_suite(text: &str, origin: &str) -> Result<Parsed<TestSuite>, Diagnostics> {
    let lexed = lex(text, true)
        .map_err(|e| Diagnostics::single(ParseDiagnostic::error(origin, e.line, e.col, e.message)))?;
    let mut p = SuiteParser {
        c: Cursor::new(&lexed.tokens),
        origin,
        diags: Vec::new(),
    };
    let suite = p.suite();
    if p.diags.iter().any(ParseDiagnostic::is_error) {
        Err(Diagnostics(p.diags))
    } else {
        Ok(Parsed {
            value: suite,
            warnings: p.diags,
        })
    }
}

/// Checks one case against its resolved inputs: rule names exist, filter
/// predicates occur, and the selection does not cut a recursive cycle.
pub fn validate_case(
    case: &TestCase,
    global: &[&Program],
    local: &[&Program],
    origin: &str,
) -> Vec<ParseDiagnostic> {
    let mut out = Vec::new();
    let at = |msg: String, error: bool| {
        if error {
            ParseDiagnostic::error(origin, case.line.max(1), case.column.max(1), msg)
        } else {
            ParseDiagnostic::warning(origin, case.line.max(1), case.column.max(1), msg)
        }
    };
    let union = match merge_programs(global.iter().chain(local).copied()) {
        Ok(p) => p,
        Err(d) => return d.0,
    };
    let mut selected = Vec::new();
    for name in &case.selected_rule_names {
        match union.rule_named(name) {
            Some(r) => selected.push(r.clone()),
            None => out.push(at(format!("test case {}: unknown rule name {name}", case.name), true)),
        }
    }
    if let Some(FilterSpec {
        scope: FilterScope::Predicates(preds),
        ..
    }) = &case.filter
    {
        let known = union.predicates();
        for p in preds {
            if !known.contains(p.as_str()) {
                out.push(at(
                    format!("test case {}: filter predicate {p} occurs in no input", case.name),
                    false,
                ));
            }
        }
    }
    if case.mode != Mode::WholeProgram && selected.len() == case.selected_rule_names.len() {
        for w in check_selection_compatibility(&union, &selected) {
            out.push(at(format!("test case {}: {w}", case.name), false));
        }
    }
    out
}

/// Validates every case of `suite`. `resolved` maps each referenced input to
/// its parsed program; inputs missing from the map are reported as errors.
pub fn validate_suite(
    suite: &TestSuite,
    resolved: &BTreeMap<InputSpec, Program>,
    origin: &str,
) -> Vec<ParseDiagnostic> {
    let mut out = Vec::new();
    let lookup = |specs: &[InputSpec], out: &mut Vec<ParseDiagnostic>| -> Vec<Program> {
        specs
            .iter()
            .filter_map(|s| {
                let p = resolved.get(s).cloned();
                if p.is_none() {
                    out.push(ParseDiagnostic::error(origin, 1, 1, format!("unresolved input {s}")));
                }
                p
            })
            .collect()
    };
    let global = lookup(&suite.global_inputs, &mut out);
    let global_refs: Vec<&Program> = global.iter().collect();
    for case in suite.all_cases() {
        let local = lookup(&case.local_inputs, &mut out);
        let local_refs: Vec<&Program> = local.iter().collect();
        out.extend(validate_case(&case, &global_refs, &local_refs, origin));
    }
    out
}
