//! Iteration-free propositional dynamic logic with intersection and tests:
//! syntax, Kripke semantics, normal forms, a Hilbert proof checker, large
//! programs and bounded model search.

pub mod calculus;
pub mod fixtures;
pub mod large_programs;
pub mod model_search;
pub mod normal_form;
pub mod semantics;
pub mod syntax;

pub use syntax::{Formula, Judgement, JudgementKind, Program, Vocabulary};
