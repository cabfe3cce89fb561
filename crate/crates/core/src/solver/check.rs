//! Stability test: model of the program, minimal model of its reduct.

use crate::model::AnswerSet;
use crate::solver::ground::{AtomId, GroundProgram};

/// True iff `candidate` is an answer set of `g`.
///
/// The candidate must be a model in which no constraint body holds, and no
/// strict subset may satisfy the reduct of `g` with respect to it. Weak
/// constraints are ignored. Literals outside the Herbrand base of `g` can
/// never be derived, so candidates containing them are rejected.
pub fn is_answer_set(g: &GroundProgram, candidate: &AnswerSet) -> bool {
    let mut m = vec![false; g.atoms().len()];
    for l in candidate.iter() {
        match g.atom_id(l) {
            Some(id) => m[id] = true,
            None => return false,
        }
    }
    is_stable(g, &m)
}

pub(crate) fn is_stable(g: &GroundProgram, m: &[bool]) -> bool {
    is_model(g, m) && is_minimal_for_reduct(g, m)
}

/// Every regular rule satisfied, no constraint body true, no complementary pair.
pub(crate) fn is_model(g: &GroundProgram, m: &[bool]) -> bool {
    g.complementary_pairs().iter().all(|&(p, q)| !(m[p] && m[q]))
        && g
            .regular_rules()
            .all(|r| !r.body_holds(m) || r.head.iter().any(|&h| m[h]))
        && g.constraints().all(|r| !r.body_holds(m))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum V {
    Unknown,
    True,
    False,
}

/// The reduct of `g` w.r.t. `m`, restricted to atoms of `m`: one
/// `(positive body, head ∩ m)` pair per rule not blocked by `m`.
fn restricted_reduct(g: &GroundProgram, m: &[bool]) -> Vec<(Vec<AtomId>, Vec<AtomId>)> {
    g.regular_rules()
        .filter(|r| r.negative.iter().all(|&a| !m[a]))
        .filter(|r| r.positive.iter().all(|&a| m[a]))
        .map(|r| {
            let head = r.head.iter().copied().filter(|&h| m[h]).collect();
            (r.positive.clone(), head)
        })
        .collect()
}

/// Assumes `m` satisfies the reduct. Looks for a strict subset that does too.
pub(crate) fn is_minimal_for_reduct(g: &GroundProgram, m: &[bool]) -> bool {
    let rules = restricted_reduct(g, m);

    // Atoms forced by rules whose head has a single atom inside m belong to
    // every model of the reduct below m.
    let mut forced = vec![false; m.len()];
    loop {
        let mut changed = false;
        for (pos, head) in &rules {
            if head.len() == 1 && !forced[head[0]] && pos.iter().all(|&a| forced[a]) {
                forced[head[0]] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let open: Vec<AtomId> = (0..m.len()).filter(|&a| m[a] && !forced[a]).collect();
    if open.is_empty() {
        return true;
    }

    let mut vals: Vec<V> = (0..m.len())
        .map(|a| match (m[a], forced[a]) {
            (true, false) => V::Unknown,
            (true, true) => V::True,
            _ => V::False,
        })
        .collect();
    !smaller_model_exists(&rules, &open, &mut vals)
}

fn propagate_reduct(rules: &[(Vec<AtomId>, Vec<AtomId>)], vals: &mut [V]) -> bool {
    loop {
        let mut changed = false;
        for (pos, head) in rules {
            if head.iter().any(|&h| vals[h] == V::True) {
                continue;
            }
            if pos.iter().any(|&a| vals[a] == V::False) {
                continue;
            }
            let mut heads = head.iter().copied().filter(|&h| vals[h] == V::Unknown);
            let mut body = pos.iter().copied().filter(|&a| vals[a] == V::Unknown);
            let (h0, b0) = (heads.next(), body.next());
            let (more_h, more_b) = (heads.next().is_some(), body.next().is_some());
            match (b0, more_b, h0, more_h) {
                (None, _, None, _) => return false,
                (None, _, Some(h), false) => {
                    vals[h] = V::True;
                    changed = true;
                }
                (Some(a), false, None, _) => {
                    vals[a] = V::False;
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn smaller_model_exists(rules: &[(Vec<AtomId>, Vec<AtomId>)], open: &[AtomId], vals: &mut [V]) -> bool {
    if !propagate_reduct(rules, vals) {
        return false;
    }
    match open.iter().find(|&&a| vals[a] == V::Unknown) {
        None => open.iter().any(|&a| vals[a] == V::False),
        Some(&a) => {
            for choice in [V::False, V::True] {
                let mut next = vals.to_vec();
                next[a] = choice;
                if smaller_model_exists(rules, open, &mut next) {
                    return true;
                }
            }
            false
        }
    }
}
