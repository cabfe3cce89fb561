//! Answer sets, weak-constraint costs and solver results.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ast::ClassicalLiteral;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("inconsistent answer set: contains both {0} and its complement")]
pub struct Inconsistent(pub ClassicalLiteral);

/// A consistent set of ground classical literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnswerSet {
    literals: BTreeSet<ClassicalLiteral>,
}

impl AnswerSet {
    pub fn new(literals: impl IntoIterator<Item = ClassicalLiteral>) -> Result<Self, Inconsistent> {
        let literals: BTreeSet<ClassicalLiteral> = literals.into_iter().collect();
        for l in &literals {
            if !l.strongly_negated && literals.contains(&l.complement()) {
                return Err(Inconsistent(l.clone()));
            }
        }
        Ok(AnswerSet { literals })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn literals(&self) -> &BTreeSet<ClassicalLiteral> {
        &self.literals
    }

    pub fn contains(&self, l: &ClassicalLiteral) -> bool {
        self.literals.contains(l)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassicalLiteral> {
        self.literals.iter()
    }

    /// Subset with the literals accepted by `keep`. Subsets stay consistent.
    pub fn retain(&self, mut keep: impl FnMut(&ClassicalLiteral) -> bool) -> AnswerSet {
        AnswerSet {
            literals: self.literals.iter().filter(|l| keep(l)).cloned().collect(),
        }
    }

    /// Sorted rendered literals; answer sets are ordered by this key.
    pub fn text_key(&self) -> Vec<String> {
        let mut v: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        v.sort();
        v
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

/// Violated weight per priority level. Missing levels count as 0.
#[derive(Debug, Clone, Default)]
pub struct CostVector {
    costs: BTreeMap<u64, u64>,
}

impl CostVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut c = CostVector::new();
        for (level, cost) in pairs {
            c.add(level, cost);
        }
        c
    }

    pub fn add(&mut self, level: u64, weight: u64) {
        *self.costs.entry(level).or_insert(0) += weight;
    }

    pub fn at_level(&self, level: u64) -> u64 {
        self.costs.get(&level).copied().unwrap_or(0)
    }

    pub fn levels(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.costs.iter().map(|(l, c)| (*l, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.costs.values().all(|c| *c == 0)
    }
}

/// Lexicographic comparison from the highest level down; `Less` is better.
pub fn compare_cost(a: &CostVector, b: &CostVector) -> Ordering {
    let levels: BTreeSet<u64> = a.costs.keys().chain(b.costs.keys()).copied().collect();
    for level in levels.into_iter().rev() {
        match a.at_level(level).cmp(&b.at_level(level)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

impl PartialEq for CostVector {
    fn eq(&self, other: &Self) -> bool {
        compare_cost(self, other) == Ordering::Equal
    }
}

impl Eq for CostVector {}

impl PartialOrd for CostVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CostVector {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_cost(self, other)
    }
}

impl fmt::Display for CostVector {
    /// DLV layout: `<[w:l],...>` from the highest level down.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, (level, cost)) in self.costs.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "[{cost}:{level}]")?;
        }
        f.write_str(">")
    }
}

/// Everything a solver run reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverResult {
    pub answer_sets: Vec<AnswerSet>,
    pub cost_vectors: Vec<Option<CostVector>>,
    /// False when enumeration stopped at a model cap.
    pub complete: bool,
    pub best_cost: Option<CostVector>,
}

impl SolverResult {
    /// Builds a result, dropping repeated answer sets (first occurrence wins)
    /// and deriving `best_cost` from the present cost vectors.
    pub fn new(
        answer_sets: Vec<AnswerSet>,
        cost_vectors: Vec<Option<CostVector>>,
        complete: bool,
    ) -> Self {
        assert_eq!(answer_sets.len(), cost_vectors.len());
        let mut seen = BTreeSet::new();
        let mut sets = Vec::with_capacity(answer_sets.len());
        let mut costs = Vec::with_capacity(answer_sets.len());
        for (a, c) in answer_sets.into_iter().zip(cost_vectors) {
            if seen.insert(a.clone()) {
                sets.push(a);
                costs.push(c);
            }
        }
        let best_cost = costs.iter().flatten().min().cloned();
        SolverResult {
            answer_sets: sets,
            cost_vectors: costs,
            complete,
            best_cost,
        }
    }

    pub fn without_costs(answer_sets: Vec<AnswerSet>, complete: bool) -> Self {
        let n = answer_sets.len();
        SolverResult::new(answer_sets, vec![None; n], complete)
    }

    pub fn len(&self) -> usize {
        self.answer_sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answer_sets.is_empty()
    }

    pub fn has_costs(&self) -> bool {
        self.cost_vectors.iter().any(Option::is_some)
    }

    /// Keeps only the answer sets whose cost equals `best_cost`, which is what
    /// DLV reports for programs with weak constraints. Results without costs
    /// are returned unchanged.
    pub fn optimal(&self) -> SolverResult {
        let Some(best) = &self.best_cost else {
            return self.clone();
        };
        let (sets, costs): (Vec<_>, Vec<_>) = self
            .answer_sets
            .iter()
            .zip(&self.cost_vectors)
            .filter(|(_, c)| c.as_ref() == Some(best))
            .map(|(a, c)| (a.clone(), c.clone()))
            .unzip();
        SolverResult::new(sets, costs, self.complete)
    }

    /// Answer sets reordered by their sorted literal text, costs moved along.
    pub fn sorted(&self) -> SolverResult {
        let mut pairs: Vec<(Vec<String>, AnswerSet, Option<CostVector>)> = self
            .answer_sets
            .iter()
            .zip(&self.cost_vectors)
            .map(|(a, c)| (a.text_key(), a.clone(), c.clone()))
            .collect();
        pairs.sort_by(|x, y| x.0.cmp(&y.0));
        let (sets, costs) = pairs.into_iter().map(|(_, a, c)| (a, c)).unzip();
        SolverResult::new(sets, costs, self.complete)
    }

    /// The answer-set family as a set, ignoring order and costs.
    pub fn family(&self) -> BTreeSet<AnswerSet> {
        self.answer_sets.iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Atom, Term};

    fn lit(p: &str, v: i64) -> ClassicalLiteral {
        ClassicalLiteral::positive(Atom::new(p, vec![Term::Int(v)]))
    }

    #[test]
    fn compare_cost_examples() {
        let c = |pairs: &[(u64, u64)]| CostVector::from_pairs(pairs.iter().copied());
        assert_eq!(compare_cost(&c(&[(1, 3)]), &c(&[(1, 4)])), Ordering::Less);
        assert_eq!(compare_cost(&c(&[]), &c(&[])), Ordering::Equal);
        assert_eq!(
            compare_cost(&c(&[(2, 1), (1, 9)]), &c(&[(2, 2), (1, 0)])),
            Ordering::Less
        );
        assert_eq!(compare_cost(&c(&[(1, 0)]), &c(&[])), Ordering::Equal);
    }

    #[test]
    fn complementary_pair_rejected() {
        let p = lit("p", 1);
        let err = AnswerSet::new([p.clone(), p.complement()]).unwrap_err();
        assert_eq!(err, Inconsistent(p));
    }

    #[test]
    fn best_cost_is_minimum_and_optimal_filters() {
        let a = AnswerSet::new([lit("a", 1)]).unwrap();
        let b = AnswerSet::new([lit("a", 2)]).unwrap();
        let r = SolverResult::new(
            vec![a.clone(), b],
            vec![
                Some(CostVector::from_pairs([(1, 2)])),
                Some(CostVector::from_pairs([(1, 5)])),
            ],
            true,
        );
        assert_eq!(r.best_cost, Some(CostVector::from_pairs([(1, 2)])));
        assert_eq!(r.optimal().answer_sets, vec![a]);
    }

    #[test]
    fn duplicates_dropped() {
        let a = AnswerSet::new([lit("a", 1)]).unwrap();
        let r = SolverResult::without_costs(vec![a.clone(), a], true);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn dlv_cost_rendering() {
        let c = CostVector::from_pairs([(1, 3), (2, 1)]);
        assert_eq!(c.to_string(), "<[1:2],[3:1]>");
    }
}
