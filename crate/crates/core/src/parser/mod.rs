//! Reading and writing programs in the DLV dialect.

pub(crate) mod lexer;
mod program;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::ast::{BodyElement, Program, Rule, RuleKind};
use crate::diag::{Diagnostics, ParseDiagnostic};
use crate::subst::canonical_form;

pub(crate) use program::Cursor;
pub use program::parse_program;
pub use program::parse_atom_list;

/// Concrete syntax to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    #[default]
    Dlv,
    /// clingo/gringo input language. Weak constraints carry a rule-specific
    /// tuple so that distinct ground instances are counted separately, as
    /// DLV does.
    Clingo,
}

/// DLV text, one rule per line, names re-emitted as `% name` comments.
pub fn serialize_program(p: &Program) -> String {
    serialize_program_as(p, Dialect::Dlv)
}

pub fn serialize_program_as(p: &Program, dialect: Dialect) -> String {
    let mut out = String::new();
    for (i, r) in p.rules().iter().enumerate() {
        if let Some(name) = &r.name {
            let _ = writeln!(out, "% {name}");
        }
        match (dialect, r.kind) {
            (Dialect::Clingo, RuleKind::WeakConstraint { weight, level }) => {
                let body: Vec<String> = r.body.iter().map(BodyElement::to_string).collect();
                let _ = write!(out, ":~ {}. [{weight}@{level}, {i}", body.join(", "));
                for v in r.variables() {
                    let _ = write!(out, ", {v}");
                }
                out.push_str("]\n");
            }
            _ => {
                let _ = writeln!(out, "{r}");
            }
        }
    }
    out
}

/// Concatenates programs from several sources into one file set.
///
/// Rules alpha-equivalent to an earlier rule are kept once. Reports
/// duplicate rule names and predicates used with different arities.
pub fn merge_programs<'a>(parts: impl IntoIterator<Item = &'a Program>) -> Result<Program, Diagnostics> {
    let mut merged = Program::new();
    let mut seen = HashSet::new();
    let mut arities: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut diags = Vec::new();
    for part in parts {
        for rule in part.rules() {
            if let Some(d) = check_arity(rule, &mut arities) {
                diags.push(d);
                continue;
            }
            let canon = canonical_form(rule);
            if seen.contains(&canon) {
                let existing_name = merged
                    .rules()
                    .iter()
                    .find(|r| canonical_form(r) == canon)
                    .and_then(|r| r.name.clone());
                if rule.name.is_none() || rule.name == existing_name {
                    continue;
                }
            }
            seen.insert(canon);
            if let Err(dup) = merged.push(rule.clone()) {
                diags.push(ParseDiagnostic::error(
                    &rule.origin,
                    0,
                    0,
                    format!("{dup} (rule #{} of {})", rule.ordinal, rule.origin),
                ));
            }
        }
    }
    if diags.is_empty() {
        Ok(merged)
    } else {
        Err(Diagnostics(diags))
    }
}

fn check_arity(rule: &Rule, arities: &mut BTreeMap<String, (usize, String)>) -> Option<ParseDiagnostic> {
    let lits = rule.head.iter().chain(rule.body.iter().filter_map(|b| match b {
        BodyElement::Literal { literal, .. } => Some(literal),
        BodyElement::Count(c) => Some(&c.pattern),
        BodyElement::Comparison { .. } => None,
    }));
    for l in lits {
        let (arity, origin) = arities
            .entry(l.atom.predicate.clone())
            .or_insert_with(|| (l.atom.arity(), rule.origin.clone()));
        if *arity != l.atom.arity() {
            return Some(ParseDiagnostic::error(
                &rule.origin,
                0,
                0,
                format!(
                    "predicate {} has arity {} here but arity {} in {}",
                    l.atom.predicate,
                    l.atom.arity(),
                    arity,
                    origin
                ),
            ));
        }
    }
    None
}
