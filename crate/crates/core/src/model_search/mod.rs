//! Bounded model search: exhaustive (bit-sliced) and seeded random
//! enumeration of small structures, countermodel minimisation, and the
//! axiom soundness harness.

pub mod engine;
mod harness;
mod minimize;
mod pool;
mod search;

use thiserror::Error;

use crate::semantics::SemanticsError;
use crate::syntax::SyntaxError;

pub use harness::{
    soundness_harness, CaseFailure, EntryKind, EntryReport, HarnessOptions, HarnessReport, MUTANTS, RULES,
};
pub use minimize::minimize_countermodel;
pub use pool::{random_formula, random_program, InstancePool};
pub use search::{
    check_program_judgement, check_validity, check_validity_all, find_model, random_structure, SearchBudget,
    SearchMode, SearchOutcome, DEFAULT_CEILING,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search budget: {0}")]
    Budget(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}
