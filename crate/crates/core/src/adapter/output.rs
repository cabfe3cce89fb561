//! Parsers for DLV and clingo answer-set output.

use thiserror::Error;

use crate::ast::ClassicalLiteral;
use crate::model::{AnswerSet, CostVector, SolverResult};
use crate::parser::parse_atom_list;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OutputError {
    #[error("line {line}: malformed model: {message}")]
    MalformedModel { line: usize, message: String },
    #[error("line {line}: cost line without a preceding model")]
    OrphanCost { line: usize },
    #[error("line {line}: malformed cost line: {text}")]
    MalformedCost { line: usize, text: String },
    #[error("solver output has no SATISFIABLE, UNSATISFIABLE or OPTIMUM FOUND line")]
    MissingFooter,
}

/// Splits at `sep` characters that are outside parentheses and quotes.
fn split_top_level(s: &str, is_sep: impl Fn(char) -> bool) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut in_str, mut escaped, mut start) = (0i32, false, false, 0usize);
    for (i, ch) in s.char_indices() {
        if in_str {
            match ch {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match ch {
            '"' => in_str = true,
            '(' => depth += 1,
            ')' => depth -= 1,
            c if depth == 0 && is_sep(c) => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts.into_iter().map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn literals(items: &[&str], line: usize) -> Result<AnswerSet, OutputError> {
    let bad = |message: String| OutputError::MalformedModel { line, message };
    if items.is_empty() {
        return Ok(AnswerSet::empty());
    }
    let text: String = items.iter().map(|l| format!("{l}. ")).collect();
    let lits: Vec<ClassicalLiteral> = parse_atom_list(&text).map_err(|d| bad(d.to_string()))?;
    if let Some(l) = lits.iter().find(|l| !l.is_ground()) {
        return Err(bad(format!("literal {l} is not ground")));
    }
    AnswerSet::new(lits).map_err(|e| bad(e.to_string()))
}

/// Reads `<[w:l],...>`, `<w:l,...>` or bare `w:l` pairs.
fn cost_pairs(text: &str, line: usize) -> Result<CostVector, OutputError> {
    let bad = || OutputError::MalformedCost {
        line,
        text: text.to_string(),
    };
    let inner = text.trim().trim_start_matches('<').trim_end_matches('>');
    let mut cost = CostVector::new();
    for item in inner.split(',').map(|s| s.trim().trim_start_matches('[').trim_end_matches(']')) {
        if item.is_empty() {
            continue;
        }
        let (w, l) = item.split_once(':').ok_or_else(bad)?;
        let w: u64 = w.trim().parse().map_err(|_| bad())?;
        let l: u64 = l.trim().parse().map_err(|_| bad())?;
        cost.add(l, w);
    }
    Ok(cost)
}

/// Parses DLV output: `{...}` model lines, optionally `Best model: {...}`
/// followed by `Cost ([Weight:Level]): <...>`. Other lines (the banner,
/// blank lines) are skipped. With `max_models > 0`, reaching that many models
/// marks the result incomplete.
pub fn parse_dlv_output(stdout: &str, max_models: usize) -> Result<SolverResult, OutputError> {
    let mut sets: Vec<AnswerSet> = Vec::new();
    let mut costs: Vec<Option<CostVector>> = Vec::new();
    for (i, raw) in stdout.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        let model = text.strip_prefix("Best model:").map(str::trim).unwrap_or(text);
        if model.starts_with('{') {
            let body = model
                .strip_prefix('{')
                .and_then(|m| m.strip_suffix('}'))
                .ok_or_else(|| OutputError::MalformedModel {
                    line,
                    message: "unterminated `{`".into(),
                })?;
            sets.push(literals(&split_top_level(body, |c| c == ','), line)?);
            costs.push(None);
        } else if let Some(rest) = text.strip_prefix("Cost") {
            let Some(slot) = costs.last_mut().filter(|c| c.is_none()) else {
                return Err(OutputError::OrphanCost { line });
            };
            let value = rest.rsplit_once("):").map(|(_, v)| v).or_else(|| rest.split_once(':').map(|(_, v)| v));
            *slot = Some(cost_pairs(value.unwrap_or(""), line)?);
        }
    }
    let complete = !(max_models > 0 && sets.len() >= max_models);
    Ok(SolverResult::new(sets, costs, complete))
}

/// Parses clingo output. `Answer: N` headers precede a space-separated
/// literal line; an `Optimization:` line annotates the preceding model.
///
/// clingo prints one value per priority level, highest first, without naming
/// the levels. `levels` gives them (highest first) when known, typically from
/// the weak constraints of the program; otherwise k values are read as
/// levels k..1.
pub fn parse_clingo_output(stdout: &str, max_models: usize, levels: Option<&[u64]>) -> Result<SolverResult, OutputError> {
    let mut sets: Vec<AnswerSet> = Vec::new();
    let mut costs: Vec<Option<CostVector>> = Vec::new();
    let mut footer = false;
    let mut models_more: Option<bool> = None;
    let mut lines = stdout.lines().enumerate().peekable();
    while let Some((i, raw)) = lines.next() {
        let line = i + 1;
        let text = raw.trim();
        if text.starts_with("Answer:") {
            let lits = match lines.peek() {
                Some((_, next)) if !is_clingo_keyword(next.trim()) => {
                    let next = next.trim();
                    lines.next();
                    split_top_level(next, char::is_whitespace)
                }
                _ => Vec::new(),
            };
            sets.push(literals(&lits, line + 1)?);
            costs.push(None);
        } else if let Some(rest) = text.strip_prefix("Optimization:") {
            let Some(slot) = costs.last_mut().filter(|c| c.is_none()) else {
                return Err(OutputError::OrphanCost { line });
            };
            let values: Vec<u64> = rest
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| OutputError::MalformedCost {
                    line,
                    text: text.to_string(),
                })?;
            let names: Vec<u64> = match levels {
                Some(ls) if ls.len() == values.len() => ls.to_vec(),
                _ => (1..=values.len() as u64).rev().collect(),
            };
            *slot = Some(CostVector::from_pairs(names.into_iter().zip(values)));
        } else if matches!(text, "SATISFIABLE" | "UNSATISFIABLE" | "OPTIMUM FOUND") {
            footer = true;
        } else if let Some(rest) = text.strip_prefix("Models") {
            if let Some((_, v)) = rest.split_once(':') {
                models_more = Some(v.trim().ends_with('+'));
            }
        }
    }
    if !footer {
        return Err(OutputError::MissingFooter);
    }
    let complete = match models_more {
        Some(more) => !more,
        None => !(max_models > 0 && sets.len() >= max_models),
    };
    Ok(SolverResult::new(sets, costs, complete))
}

fn is_clingo_keyword(line: &str) -> bool {
    line.starts_with("Answer:")
        || line.starts_with("Optimization:")
        || matches!(line, "SATISFIABLE" | "UNSATISFIABLE" | "OPTIMUM FOUND" | "UNKNOWN")
}
