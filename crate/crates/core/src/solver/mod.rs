//! Reference solver: grounding, stability checking and enumeration.

mod check;
mod enumerate;
mod ground;

use thiserror::Error;

pub use check::is_answer_set;
pub use enumerate::{cost_vector, enumerate_answer_sets, Enumerator, ExecutionMode, DEFAULT_FREE_ATOM_CAP};
pub use ground::{ground, AtomId, GroundCount, GroundProgram, GroundRule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("program has variables but no constants to instantiate them with")]
    EmptyUniverse,
    #[error("{free} undetermined atoms after propagation exceeds the reference solver limit of {cap}")]
    TooManyAtoms { free: usize, cap: usize },
}
