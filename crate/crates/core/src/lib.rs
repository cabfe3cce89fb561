//! Unit testing for answer set programs.
//!
//! Test suites select parts of a program (single rules, a splitting-set
//! bottom, or the whole program), run them through a solver and check
//! assertions over the resulting answer sets.

pub mod ast;
pub mod diag;
pub mod model;
pub mod parser;
pub mod subst;
pub mod solver;
pub mod analysis;
pub mod testlang;
pub mod assertions;
pub mod adapter;
