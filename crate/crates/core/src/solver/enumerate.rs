//! Answer-set enumeration by propagation and backtracking over head atoms.

use crate::ast::{BodyElement, Rule, RuleKind};
use crate::model::{AnswerSet, CostVector, SolverResult};
use crate::solver::check::is_stable;
use crate::solver::ground::{AtomId, GroundProgram, GroundRule};
use crate::solver::SolveError;

/// Largest number of undetermined atoms the reference solver will branch on.
pub const DEFAULT_FREE_ATOM_CAP: usize = 24;

/// How independent subtrees of the search are explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Sequential,
    /// Subtrees run on the rayon pool. Without the `parallel` feature this
    /// behaves like `Sequential`.
    Parallel,
}

impl Default for ExecutionMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecutionMode::Parallel
        } else {
            ExecutionMode::Sequential
        }
    }
}

#[derive(Debug, Clone)]
pub struct Enumerator {
    /// 0 means all answer sets.
    pub max_models: usize,
    pub free_atom_cap: usize,
    pub mode: ExecutionMode,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            max_models: 0,
            free_atom_cap: DEFAULT_FREE_ATOM_CAP,
            mode: ExecutionMode::default(),
        }
    }
}

/// Enumerates answer sets of `g` with default limits.
pub fn enumerate_answer_sets(g: &GroundProgram, max_models: usize) -> Result<SolverResult, SolveError> {
    Enumerator {
        max_models,
        ..Enumerator::default()
    }
    .enumerate(g)
}

/// Weak-constraint cost of `a`: for each level, the summed weight of the
/// ground weak constraints whose body holds in `a`.
pub fn cost_vector(a: &AnswerSet, weak: &[Rule]) -> CostVector {
    let mut cost = CostVector::new();
    for r in weak {
        let RuleKind::WeakConstraint { weight, level } = r.kind else {
            continue;
        };
        let holds = r.body.iter().all(|b| match b {
            BodyElement::Literal {
                literal,
                default_negated,
            } => a.contains(literal) != *default_negated,
            BodyElement::Comparison { left, op, right } => op.eval(left, right),
            BodyElement::Count(_) => false,
        });
        if holds {
            cost.add(level, weight);
        }
    }
    cost
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum V {
    Unknown,
    True,
    False,
}

struct Search<'g> {
    g: &'g GroundProgram,
    regular: Vec<&'g GroundRule>,
    constraints: Vec<&'g GroundRule>,
    pairs: Vec<(AtomId, AtomId)>,
    /// For each atom, the regular rules with it in the head.
    supports: Vec<Vec<usize>>,
}

impl<'g> Search<'g> {
    fn new(g: &'g GroundProgram) -> Self {
        let regular: Vec<&GroundRule> = g.regular_rules().collect();
        let mut supports = vec![Vec::new(); g.atoms().len()];
        for (i, r) in regular.iter().enumerate() {
            for &h in &r.head {
                supports[h].push(i);
            }
        }
        Search {
            g,
            regular,
            supports,
            constraints: g.constraints().collect(),
            pairs: g.complementary_pairs(),
        }
    }

    fn initial(&self) -> Vec<V> {
        let mut vals = vec![V::False; self.g.atoms().len()];
        for r in &self.regular {
            for &h in &r.head {
                vals[h] = V::Unknown;
            }
        }
        vals
    }

    /// Unit propagation over rules, constraints and complementary pairs.
    /// Returns false on conflict.
    fn propagate(&self, vals: &mut [V]) -> bool {
        loop {
            let mut changed = false;
            for &(p, q) in &self.pairs {
                match (vals[p], vals[q]) {
                    (V::True, V::True) => return false,
                    (V::True, V::Unknown) => {
                        vals[q] = V::False;
                        changed = true;
                    }
                    (V::Unknown, V::True) => {
                        vals[p] = V::False;
                        changed = true;
                    }
                    _ => {}
                }
            }
            for r in self.regular.iter().chain(&self.constraints) {
                match self.propagate_rule(r, vals) {
                    Step::Conflict => return false,
                    Step::Changed => changed = true,
                    Step::Nothing => {}
                }
            }
            // An atom of a stable model is the only true head atom of some rule
            // whose body holds; without such a candidate rule it must be false.
            for (a, rules) in self.supports.iter().enumerate() {
                if vals[a] == V::Unknown && !rules.iter().any(|&i| self.may_support(self.regular[i], a, vals)) {
                    vals[a] = V::False;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn may_support(&self, r: &GroundRule, a: AtomId, vals: &[V]) -> bool {
        r.head.iter().all(|&h| h == a || vals[h] != V::True)
            && r.positive.iter().all(|&p| vals[p] != V::False)
            && r.negative.iter().all(|&n| vals[n] != V::True)
    }

    fn propagate_rule(&self, r: &GroundRule, vals: &mut [V]) -> Step {
        if r.head.iter().any(|&h| vals[h] == V::True)
            || r.positive.iter().any(|&a| vals[a] == V::False)
            || r.negative.iter().any(|&a| vals[a] == V::True)
        {
            return Step::Nothing;
        }
        // Aggregates are only evaluated once every element atom is decided.
        let mut count_open = false;
        for c in &r.counts {
            if c.elements.iter().any(|(_, a)| vals[*a] == V::Unknown) {
                count_open = true;
            } else if !c.holds(|a| vals[a] == V::True) {
                return Step::Nothing;
            }
        }
        if count_open {
            return Step::Nothing;
        }
        let open = |xs: &[AtomId]| {
            let mut it = xs.iter().copied().filter(|&a| vals[a] == V::Unknown);
            (it.next(), it.count())
        };
        let (first_pos, more_pos) = open(&r.positive);
        let (first_neg, more_neg) = open(&r.negative);
        let (first_head, more_head) = open(&r.head);
        let body_open = first_pos.is_some() as usize + first_neg.is_some() as usize + more_pos + more_neg;
        let head_open = first_head.is_some() as usize + more_head;
        match (body_open, head_open) {
            (0, 0) => Step::Conflict,
            (0, 1) => {
                vals[first_head.unwrap()] = V::True;
                Step::Changed
            }
            (1, 0) => {
                match (first_pos, first_neg) {
                    (Some(a), _) => vals[a] = V::False,
                    (None, Some(a)) => vals[a] = V::True,
                    (None, None) => unreachable!(),
                }
                Step::Changed
            }
            _ => Step::Nothing,
        }
    }

    fn next_open(&self, vals: &[V]) -> Option<AtomId> {
        vals.iter().position(|v| *v == V::Unknown)
    }

    fn leaf(&self, vals: &[V]) -> Option<Vec<bool>> {
        let m: Vec<bool> = vals.iter().map(|v| *v == V::True).collect();
        is_stable(self.g, &m).then_some(m)
    }

    /// Depth-first search; stops once `out` holds `limit` models (0 = no limit).
    fn dfs(&self, mut vals: Vec<V>, out: &mut Vec<Vec<bool>>, limit: usize) {
        if limit > 0 && out.len() >= limit {
            return;
        }
        if !self.propagate(&mut vals) {
            return;
        }
        match self.next_open(&vals) {
            None => out.extend(self.leaf(&vals)),
            Some(a) => {
                for choice in [V::False, V::True] {
                    let mut next = vals.clone();
                    next[a] = choice;
                    self.dfs(next, out, limit);
                }
            }
        }
    }

    /// Partial assignments covering the search space, split on up to `depth`
    /// open atoms.
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    fn frontier(&self, vals: Vec<V>, depth: usize, out: &mut Vec<Vec<V>>) {
        let mut vals = vals;
        if !self.propagate(&mut vals) {
            return;
        }
        match self.next_open(&vals) {
            Some(a) if depth > 0 => {
                for choice in [V::False, V::True] {
                    let mut next = vals.clone();
                    next[a] = choice;
                    self.frontier(next, depth - 1, out);
                }
            }
            _ => out.push(vals),
        }
    }
}

enum Step {
    Conflict,
    Changed,
    Nothing,
}

impl Enumerator {
    pub fn sequential() -> Self {
        Enumerator {
            mode: ExecutionMode::Sequential,
            ..Enumerator::default()
        }
    }

    pub fn parallel() -> Self {
        Enumerator {
            mode: ExecutionMode::Parallel,
            ..Enumerator::default()
        }
    }

    /// Answer sets of `g` in lexicographic order of their sorted literal
    /// text, with cost vectors when `g` has weak constraints.
    pub fn enumerate(&self, g: &GroundProgram) -> Result<SolverResult, SolveError> {
        let search = Search::new(g);
        let mut vals = search.initial();
        let consistent = search.propagate(&mut vals);
        let free = vals.iter().filter(|v| **v == V::Unknown).count();
        if free > self.free_atom_cap {
            return Err(SolveError::TooManyAtoms {
                free,
                cap: self.free_atom_cap,
            });
        }

        let mut models: Vec<Vec<bool>> = Vec::new();
        let mut complete = true;
        if consistent {
            if self.max_models > 0 {
                search.dfs(vals, &mut models, self.max_models + 1);
                if models.len() > self.max_models {
                    models.truncate(self.max_models);
                    complete = false;
                }
            } else {
                models = self.run_all(&search, vals, free);
            }
        }

        let weak = g.weak_constraints();
        let mut sets: Vec<(Vec<String>, AnswerSet)> = models
            .into_iter()
            .map(|m| {
                let lits = m
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| **t)
                    .map(|(i, _)| g.atoms()[i].clone());
                let a = AnswerSet::new(lits).expect("stable models are consistent");
                (a.text_key(), a)
            })
            .collect();
        sets.sort_by(|x, y| x.0.cmp(&y.0));
        let answer_sets: Vec<AnswerSet> = sets.into_iter().map(|(_, a)| a).collect();
        let costs = answer_sets
            .iter()
            .map(|a| (!weak.is_empty()).then(|| cost_vector(a, &weak)))
            .collect();
        Ok(SolverResult::new(answer_sets, costs, complete))
    }

    #[cfg(feature = "parallel")]
    fn run_all(&self, search: &Search<'_>, vals: Vec<V>, free: usize) -> Vec<Vec<bool>> {
        use rayon::prelude::*;
        if self.mode == ExecutionMode::Sequential || free < 8 {
            let mut out = Vec::new();
            search.dfs(vals, &mut out, 0);
            return out;
        }
        let mut roots = Vec::new();
        search.frontier(vals, 6, &mut roots);
        roots
            .into_par_iter()
            .flat_map_iter(|root| {
                let mut out = Vec::new();
                search.dfs(root, &mut out, 0);
                out
            })
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn run_all(&self, search: &Search<'_>, vals: Vec<V>, _free: usize) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        search.dfs(vals, &mut out, 0);
        out
    }
}
