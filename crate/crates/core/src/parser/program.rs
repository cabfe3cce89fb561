//! Recursive-descent parser for DLV-style programs.

use std::collections::{BTreeMap, HashMap};

use crate::ast::{
    Atom, BodyElement, ClassicalLiteral, CompareOp, CountAggregate, Program, Rule, RuleKind, Term,
};
use crate::diag::{Diagnostics, ParseDiagnostic, Parsed};
use crate::parser::lexer::{lex, Comment, Tok, Token};

struct SyntaxError {
    message: String,
    line: usize,
    col: usize,
}

type PResult<T> = Result<T, SyntaxError>;

pub(crate) struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(tokens: &'a [Token]) -> Self {
        Cursor { tokens, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub(crate) fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub(crate) fn token(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub(crate) fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

fn err_at<T>(t: &Token, message: impl Into<String>) -> PResult<T> {
    Err(SyntaxError {
        message: message.into(),
        line: t.line,
        col: t.col,
    })
}

fn expect(c: &mut Cursor<'_>, tok: Tok, context: &str) -> PResult<()> {
    if c.eat(&tok) {
        Ok(())
    } else {
        let t = c.token();
        err_at(
            t,
            format!("expected {} {context}, found {}", tok.describe(), t.tok.describe()),
        )
    }
}

fn is_var_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

fn is_const_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase())
}

/// Per-rule parse state: variable occurrences and the anonymous-variable counter.
#[derive(Default)]
struct RuleScope {
    var_positions: Vec<(String, usize, usize)>,
    anon: usize,
}

impl RuleScope {
    fn first_position(&self, var: &str) -> Option<(usize, usize)> {
        self.var_positions
            .iter()
            .find(|(v, _, _)| v == var)
            .map(|(_, l, c)| (*l, *c))
    }
}

struct RuleParser<'s> {
    scope: &'s mut RuleScope,
}

impl RuleParser<'_> {
    fn term(&mut self, c: &mut Cursor<'_>) -> PResult<Term> {
        let t = c.token().clone();
        match &t.tok {
            Tok::Int(v) => {
                c.bump();
                Ok(Term::Int(*v))
            }
            Tok::Minus => {
                c.bump();
                match c.peek().clone() {
                    Tok::Int(v) => {
                        c.bump();
                        Ok(Term::Int(-v))
                    }
                    _ => err_at(c.token(), "expected integer after `-` in term position"),
                }
            }
            Tok::Str(s) => {
                c.bump();
                Ok(Term::Str(s.clone()))
            }
            Tok::Ident(name) if name == "_" => {
                c.bump();
                let fresh = format!("_Anon{}", self.scope.anon);
                self.scope.anon += 1;
                self.scope.var_positions.push(("_".into(), t.line, t.col));
                Ok(Term::Var(fresh))
            }
            Tok::Ident(name) if is_var_name(name) => {
                c.bump();
                self.scope
                    .var_positions
                    .push((name.clone(), t.line, t.col));
                Ok(Term::Var(name.clone()))
            }
            Tok::Ident(name) => {
                c.bump();
                if *c.peek() == Tok::LParen {
                    return err_at(&t, format!("function symbol `{name}` is not supported"));
                }
                Ok(Term::Sym(name.clone()))
            }
            other => err_at(&t, format!("expected a term, found {}", other.describe())),
        }
    }

    fn atom_after_name(&mut self, c: &mut Cursor<'_>, name: String) -> PResult<Atom> {
        let mut terms = Vec::new();
        if c.eat(&Tok::LParen) {
            loop {
                terms.push(self.term(c)?);
                if c.eat(&Tok::Comma) {
                    continue;
                }
                expect(c, Tok::RParen, "to close argument list")?;
                break;
            }
        }
        Ok(Atom::new(name, terms))
    }

    fn classical_literal(&mut self, c: &mut Cursor<'_>) -> PResult<ClassicalLiteral> {
        let negated = c.eat(&Tok::Minus);
        let t = c.token().clone();
        match &t.tok {
            Tok::Ident(name) if is_const_name(name) => {
                c.bump();
                let atom = self.atom_after_name(c, name.clone())?;
                Ok(ClassicalLiteral {
                    atom,
                    strongly_negated: negated,
                })
            }
            Tok::Ident(name) => err_at(
                &t,
                format!("predicate names must start with a lowercase letter, found `{name}`"),
            ),
            other => err_at(&t, format!("expected a literal, found {}", other.describe())),
        }
    }

    fn aggregate(&mut self, c: &mut Cursor<'_>) -> PResult<(Vec<Term>, ClassicalLiteral)> {
        let t = c.token().clone();
        match &t.tok {
            Tok::Directive(d) if d == "count" => {
                c.bump();
            }
            Tok::Directive(d) => return err_at(&t, format!("unsupported aggregate `#{d}`")),
            _ => return err_at(&t, "expected `#count`"),
        }
        expect(c, Tok::LBrace, "after `#count`")?;
        let mut vars = Vec::new();
        loop {
            let vt = c.token().clone();
            let term = self.term(c)?;
            if term.is_ground() {
                return err_at(&vt, "aggregate elements must be variables");
            }
            vars.push(term);
            if c.eat(&Tok::Comma) {
                continue;
            }
            break;
        }
        expect(c, Tok::Colon, "in aggregate element")?;
        let pattern = self.classical_literal(c)?;
        expect(c, Tok::RBrace, "to close aggregate")?;
        Ok((vars, pattern))
    }

    fn compare_op(c: &mut Cursor<'_>) -> PResult<CompareOp> {
        match c.peek().clone() {
            Tok::Cmp(op) => {
                c.bump();
                Ok(op)
            }
            other => err_at(
                c.token(),
                format!("expected a comparison operator, found {}", other.describe()),
            ),
        }
    }

    fn body_element(&mut self, c: &mut Cursor<'_>, allow_count: bool) -> PResult<BodyElement> {
        let t = c.token().clone();
        let count_not_allowed = |t: &Token| -> PResult<BodyElement> {
            err_at(t, "`#count` is only allowed in constraint bodies")
        };
        if matches!(&t.tok, Tok::Directive(_)) {
            if !allow_count {
                return count_not_allowed(&t);
            }
            let (bound_vars, pattern) = self.aggregate(c)?;
            let op = Self::compare_op(c)?;
            let guard = self.term(c)?;
            return Ok(BodyElement::Count(CountAggregate {
                bound_vars,
                pattern,
                op,
                guard,
            }));
        }
        if let Tok::Ident(kw) = &t.tok {
            if kw == "not" && matches!(c.peek_at(1), Tok::Ident(_) | Tok::Minus) {
                c.bump();
                let literal = self.classical_literal(c)?;
                return Ok(BodyElement::naf(literal));
            }
        }
        let starts_literal = match (&t.tok, c.peek_at(1)) {
            (Tok::Ident(n), next) => is_const_name(n) && !matches!(next, Tok::Cmp(_)),
            (Tok::Minus, Tok::Ident(_)) => true,
            _ => false,
        };
        if starts_literal {
            let literal = self.classical_literal(c)?;
            if let Tok::Cmp(_) = c.peek() {
                return err_at(c.token(), "comparisons over atoms are not supported");
            }
            return Ok(BodyElement::pos(literal));
        }
        let left = self.term(c)?;
        let op = Self::compare_op(c)?;
        if matches!(c.peek(), Tok::Directive(_)) {
            let at = c.token().clone();
            if !allow_count {
                return count_not_allowed(&at);
            }
            let (bound_vars, pattern) = self.aggregate(c)?;
            return Ok(BodyElement::Count(CountAggregate {
                bound_vars,
                pattern,
                op: op.flipped(),
                guard: left,
            }));
        }
        let right = self.term(c)?;
        Ok(BodyElement::Comparison { left, op, right })
    }

    fn body(&mut self, c: &mut Cursor<'_>, allow_count: bool) -> PResult<Vec<BodyElement>> {
        let mut body = Vec::new();
        if *c.peek() == Tok::Period {
            return Ok(body);
        }
        loop {
            body.push(self.body_element(c, allow_count)?);
            if c.eat(&Tok::Comma) {
                continue;
            }
            return Ok(body);
        }
    }

    fn weak_annotation(c: &mut Cursor<'_>) -> PResult<(u64, u64)> {
        let mut weight = 1;
        let mut level = 1;
        if !c.eat(&Tok::LBracket) {
            return Ok((weight, level));
        }
        let number = |c: &mut Cursor<'_>, what: &str| -> PResult<u64> {
            let t = c.token().clone();
            match t.tok {
                Tok::Int(v) if v > 0 => {
                    c.bump();
                    Ok(v as u64)
                }
                _ => err_at(&t, format!("expected a positive integer {what}")),
            }
        };
        if !matches!(c.peek(), Tok::Colon | Tok::At) {
            weight = number(c, "weight")?;
        }
        if (c.eat(&Tok::Colon) || c.eat(&Tok::At)) && *c.peek() != Tok::RBracket {
            level = number(c, "level")?;
        }
        expect(c, Tok::RBracket, "to close weak constraint annotation")?;
        Ok((weight, level))
    }

    fn rule(&mut self, c: &mut Cursor<'_>) -> PResult<Rule> {
        match c.peek() {
            Tok::If => {
                c.bump();
                let body = self.body(c, true)?;
                expect(c, Tok::Period, "at end of constraint")?;
                Ok(Rule::new(Vec::new(), body, RuleKind::Constraint))
            }
            Tok::WeakIf => {
                c.bump();
                let body = self.body(c, false)?;
                if body.is_empty() {
                    return err_at(c.token(), "weak constraint needs a non-empty body");
                }
                expect(c, Tok::Period, "at end of weak constraint")?;
                let (weight, level) = Self::weak_annotation(c)?;
                Ok(Rule::new(
                    Vec::new(),
                    body,
                    RuleKind::WeakConstraint { weight, level },
                ))
            }
            _ => {
                let mut head = vec![self.classical_literal(c)?];
                loop {
                    let disjunction = match (c.peek(), c.peek_at(1)) {
                        (Tok::Bar, _) => true,
                        (Tok::Ident(v), Tok::Ident(_) | Tok::Minus) => v == "v",
                        _ => false,
                    };
                    if !disjunction {
                        break;
                    }
                    c.bump();
                    head.push(self.classical_literal(c)?);
                }
                let body = if c.eat(&Tok::If) {
                    self.body(c, false)?
                } else {
                    Vec::new()
                };
                expect(c, Tok::Period, "at end of rule")?;
                Ok(Rule::new(head, body, RuleKind::Regular))
            }
        }
    }
}

fn recover(c: &mut Cursor<'_>) {
    while !c.at_eof() {
        if c.bump().tok == Tok::Period {
            if *c.peek() == Tok::LBracket {
                while !c.at_eof() && c.bump().tok != Tok::RBracket {}
            }
            return;
        }
    }
}

fn is_name_comment(text: &str) -> Option<&str> {
    let t = text.trim();
    let mut chars = t.chars();
    let first = chars.next()?;
    ((first.is_ascii_alphabetic() || first == '_')
        && chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_'))
    .then_some(t)
}

/// Parses a whole program. Rule names come from a comment whose entire
/// trimmed text is an identifier, placed alone on the line directly above
/// the rule.
pub fn parse_program(text: &str, origin: &str) -> Result<Parsed<Program>, Diagnostics> {
    let lexed = lex(text, false).map_err(|e| {
        Diagnostics::single(ParseDiagnostic::error(origin, e.line, e.col, e.message))
    })?;
    let name_by_line: HashMap<usize, &Comment> = lexed
        .comments
        .iter()
        .filter(|c| c.starts_line && is_name_comment(&c.text).is_some())
        .map(|c| (c.line, c))
        .collect();

    let mut c = Cursor::new(&lexed.tokens);
    let mut diags = Vec::new();
    let mut program = Program::new();
    let mut arities: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    let mut ordinal = 0;

    while !c.at_eof() {
        let start = c.token().clone();
        let mut scope = RuleScope::default();
        let parsed = RuleParser { scope: &mut scope }.rule(&mut c);
        let mut rule = match parsed {
            Ok(r) => r,
            Err(e) => {
                diags.push(ParseDiagnostic::error(origin, e.line, e.col, e.message));
                recover(&mut c);
                continue;
            }
        };

        let unsafe_vars = rule.unsafe_variables();
        for v in &unsafe_vars {
            let shown = if v.starts_with("_Anon") { "_" } else { v.as_str() };
            let (line, col) = scope
                .first_position(shown)
                .unwrap_or((start.line, start.col));
            diags.push(ParseDiagnostic::error(
                origin,
                line,
                col,
                format!("unsafe variable {shown}: it does not occur in a positive body literal"),
            ));
        }
        if !unsafe_vars.is_empty() {
            continue;
        }

        let mut arity_ok = true;
        for l in rule
            .head
            .iter()
            .chain(rule.body.iter().filter_map(|b| match b {
                BodyElement::Literal { literal, .. } => Some(literal),
                BodyElement::Count(agg) => Some(&agg.pattern),
                BodyElement::Comparison { .. } => None,
            }))
        {
            let entry = arities
                .entry(l.atom.predicate.clone())
                .or_insert((l.atom.arity(), start.line, start.col));
            if entry.0 != l.atom.arity() {
                diags.push(ParseDiagnostic::error(
                    origin,
                    start.line,
                    start.col,
                    format!(
                        "predicate {} used with arity {} but earlier (line {}) with arity {}",
                        l.atom.predicate,
                        l.atom.arity(),
                        entry.1,
                        entry.0
                    ),
                ));
                arity_ok = false;
            }
        }
        if !arity_ok {
            continue;
        }

        if start.line > 1 {
            if let Some(comment) = name_by_line.get(&(start.line - 1)) {
                rule.name = is_name_comment(&comment.text).map(str::to_string);
            }
        }
        rule.origin = origin.to_string();
        rule.ordinal = ordinal;
        ordinal += 1;
        if let Err(dup) = program.push(rule) {
            diags.push(ParseDiagnostic::error(
                origin,
                start.line.saturating_sub(1).max(1),
                1,
                dup.to_string(),
            ));
        }
    }

    if diags.iter().any(ParseDiagnostic::is_error) {
        Err(Diagnostics(diags))
    } else {
        Ok(Parsed {
            value: program,
            warnings: diags,
        })
    }
}

/// Parses a period-separated list of (possibly non-ground, possibly strongly
/// negated) literals such as `inClique(2). inClique(5).`
pub fn parse_atom_list(text: &str) -> Result<Vec<ClassicalLiteral>, Diagnostics> {
    const ORIGIN: &str = "atom list";
    let lexed = lex(text, false)
        .map_err(|e| Diagnostics::single(ParseDiagnostic::error(ORIGIN, e.line, e.col, e.message)))?;
    let mut c = Cursor::new(&lexed.tokens);
    let mut scope = RuleScope::default();
    let mut out = Vec::new();
    while !c.at_eof() {
        let lit = RuleParser { scope: &mut scope }
            .classical_literal(&mut c)
            .and_then(|l| expect(&mut c, Tok::Period, "after atom").map(|_| l))
            .map_err(|e| {
                Diagnostics::single(ParseDiagnostic::error(ORIGIN, e.line, e.col, e.message))
            })?;
        out.push(lit);
    }
    if out.is_empty() {
        return Err(Diagnostics::single(ParseDiagnostic::error(
            ORIGIN,
            1,
            1,
            "atom list is empty",
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(src: &str) -> Program {
        parse_program(src, "t.dl").unwrap().value
    }

    fn errors(src: &str) -> Vec<ParseDiagnostic> {
        parse_program(src, "t.dl").unwrap_err().0
    }

    #[test]
    fn single_fact() {
        let p = ok("node(1).");
        assert_eq!(p.len(), 1);
        assert!(p.rules()[0].is_fact());
        assert_eq!(p.rules()[0].to_string(), "node(1).");
    }

    #[test]
    fn name_from_preceding_comment() {
        let p = ok("% r2\nuedge(X,Y) :- edge(X,Y), X < Y.");
        let r = p.rule_named("r2").unwrap();
        assert_eq!(r.kind, RuleKind::Regular);
        assert_eq!(r.to_string(), "uedge(X,Y) :- edge(X,Y), X < Y.");
    }

    #[test]
    fn prose_comment_and_gap_do_not_name() {
        let p = ok("% this is r2\na.\n% r3\n\nb.\nc. % r4\nd.");
        assert!(p.rules().iter().all(|r| r.name.is_none()));
    }

    #[test]
    fn weak_constraint_defaults() {
        let p = ok(":~ outClique(X2).");
        assert_eq!(p.rules()[0].kind, RuleKind::DEFAULT_WEAK);
        let p = ok(":~ a. [3:2]\n:~ b. [4@5]\n:~ c. [7]");
        let kinds: Vec<_> = p.rules().iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            vec![
                RuleKind::WeakConstraint { weight: 3, level: 2 },
                RuleKind::WeakConstraint { weight: 4, level: 5 },
                RuleKind::WeakConstraint { weight: 7, level: 1 },
            ]
        );
    }

    #[test]
    fn unsafe_negative_variable() {
        let e = errors("p(X) :- not q(X).");
        assert_eq!(e.len(), 1);
        assert!(e[0].message.contains("unsafe variable X"), "{}", e[0].message);
        // points at the first X
        assert_eq!((e[0].line, e[0].column), (1, 3));
    }

    #[test]
    fn disjunction_with_v_and_bar() {
        let p = ok("a v b.\nc | -d :- e.\ne.");
        assert_eq!(p.rules()[0].head.len(), 2);
        assert_eq!(p.rules()[1].to_string(), "c | -d :- e.");
    }

    #[test]
    fn count_only_in_constraints() {
        ok(":- #count{ X1: inClique(X1) } < 3.");
        ok(":- 3 > #count{X: p(X)}.");
        let e = errors("a :- #count{X: p(X)} < 3.");
        assert!(e[0].message.contains("#count"));
    }

    #[test]
    fn flipped_guard() {
        let p = ok(":- 3 > #count{X: p(X)}.");
        assert_eq!(p.rules()[0].to_string(), ":- #count{X: p(X)} < 3.");
    }

    #[test]
    fn syntax_error_position_and_recovery() {
        let e = errors("a(.\nb :- .\nc(1.");
        assert_eq!(e.len(), 2);
        assert_eq!((e[0].line, e[0].column), (1, 3));
        assert_eq!(e[1].line, 3);
    }

    #[test]
    fn duplicate_name_and_arity_conflict() {
        let e = errors("% r1\na.\n% r1\nb.");
        assert!(e[0].message.contains("duplicate rule name"));
        let e = errors("p(1).\np(1,2).");
        assert!(e[0].message.contains("arity"));
    }

    #[test]
    fn anonymous_variables_are_fresh() {
        let p = ok("p(X) :- q(X,_), r(_).");
        let vars = p.rules()[0].variables();
        assert_eq!(vars.len(), 3);
    }

    #[test]
    fn function_symbols_rejected() {
        assert!(errors("p(f(1)).")[0].message.contains("function symbol"));
    }

    #[test]
    fn negative_integers_and_strings() {
        let p = ok("p(-3, \"a b\").");
        assert_eq!(p.rules()[0].to_string(), "p(-3,\"a b\").");
    }

    #[test]
    fn atom_lists() {
        let l = parse_atom_list("inClique(2). inClique(5).").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l[1].to_string(), "inClique(5)");
        assert_eq!(parse_atom_list("uedge(2,1).").unwrap()[0].to_string(), "uedge(2,1)");
        let n = parse_atom_list("-broken(X).").unwrap();
        assert!(n[0].strongly_negated && !n[0].is_ground());
        assert!(parse_atom_list("  ").is_err());
        assert!(parse_atom_list("p(1) q(2).").is_err());
    }
}
