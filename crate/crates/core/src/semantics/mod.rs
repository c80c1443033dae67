//! Finite Kripke structures, evaluation, witness graphs and the splitting
//! operations on them.

mod eval;
mod gateway;
mod kripke;
mod witness;

use thiserror::Error;

pub use eval::{eval, formula_set, relation, relation_with};
pub use gateway::{excise_loop, gateway_split};
pub use kripke::{bits, KripkeStructure, Relation, World, WorldSet, MAX_WORLDS};
pub use witness::{
    articulation_nodes, is_minimal_witness, is_witness, witness_graphs, Edge, TransitionQuery,
    WitnessGraph, WitnessSet, DEFAULT_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("unknown world {0}")]
    UnknownWorld(String),
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown atomic program `{0}`")]
    UnknownProgram(String),
    #[error("structures are limited to 64 worlds, got {0}")]
    TooManyWorlds(usize),
    #[error("a structure needs at least one world")]
    NoWorlds,
    #[error("duplicate world name")]
    DuplicateWorld,
    #[error("vocabulary error: {0}")]
    Vocabulary(String),
    #[error("invalid structure JSON: {0}")]
    Json(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
