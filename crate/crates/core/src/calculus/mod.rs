//! Hilbert-style proofs over the axiom schemes, the rules MP, Gen, USub and
//! PSub, the cycle-transfer rule `C`, and structural rules for program
//! judgements.

mod closure;
mod json;
mod proof;
mod schemes;
mod taut;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::Formula;

pub use closure::{closure_domain, closure_violations, world_theory, ClosureProperty, ClosureViolation};
pub use json::{proof_from_json, proof_from_value, proof_to_json};
pub use proof::{check_proof, show_binding, Justification, Proof, ProofLine, Statement, StructKind};
pub use schemes::{
    check_rule_c, count_occurrences, is_axiom_instance, is_program_axiom_instance, match_formula_scheme,
    match_program_scheme, replace_all, rule_c_judgement, rule_c_pattern, scheme, schemes, Binding, Instance,
    Occurrences, Scheme, SchemeBody,
};
pub use taut::{is_tautology, propositional_atoms, MAX_TAUT_ATOMS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("line {id}: {reason}")]
    Line { id: usize, reason: String },
    #[error("malformed proof: {0}")]
    Format(String),
}

impl ProofError {
    pub fn line_id(&self) -> Option<usize> {
        match self {
            ProofError::Line { id, .. } => Some(*id),
            ProofError::Format(_) => None,
        }
    }
}

/// A finite set of formulae.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Theory {
    pub formulas: BTreeSet<Formula>,
}

impl Theory {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Self {
        Theory {
            formulas: formulas.into_iter().collect(),
        }
    }

    /// `c` is `true`, a member, or a conjunction of such.
    fn is_selection(&self, c: &Formula) -> bool {
        if *c == Formula::True || self.formulas.contains(c) {
            return true;
        }
        match c.as_and() {
            Some((a, b)) => self.is_selection(a) && self.is_selection(b),
            None => false,
        }
    }
}

/// The proof checks and ends in `(conjunction of members of t) -> f`. A
/// final line `f` itself counts as the empty conjunction.
pub fn theory_derives(t: &Theory, f: &Formula, p: &Proof) -> Result<bool, ProofError> {
    check_proof(p)?;
    let last = p
        .last_formula()
        .ok_or_else(|| ProofError::Format("proof does not end in a formula".into()))?;
    if last == f {
        return Ok(true);
    }
    match last.as_implies() {
        Some((c, g)) if g == f => Ok(t.is_selection(c)),
        _ => Err(ProofError::Format("final line is not of the form (selection) -> f".into())),
    }
}
