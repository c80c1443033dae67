use super::kripke::{KripkeStructure, Relation, World, WorldSet};
use super::SemanticsError;
use crate::syntax::{Formula, Program};

/// Set of worlds satisfying `f`. Computed bottom-up: every subterm's
/// denotation is computed once per call.
pub fn formula_set(k: &KripkeStructure, f: &Formula) -> Result<WorldSet, SemanticsError> {
    Ok(match f {
        Formula::True => k.all_worlds(),
        Formula::Prop(p) => k.valuation(p)?,
        Formula::Not(g) => !formula_set(k, g)? & k.all_worlds(),
        Formula::Or(a, b) => formula_set(k, a)? | formula_set(k, b)?,
        Formula::Diamond(p, g) => {
            let rel = relation(k, p)?;
            let target = formula_set(k, g)?;
            rel.rows
                .iter()
                .enumerate()
                .filter(|(_, r)| **r & target != 0)
                .fold(0, |acc, (u, _)| acc | 1 << u)
        }
    })
}

pub fn relation(k: &KripkeStructure, p: &Program) -> Result<Relation, SemanticsError> {
    relation_with(k, p, &|a| k.edges(a).cloned())
}

/// Relation of `p` where atomic programs are looked up through `atom`;
/// test formulas are still evaluated in the full structure `k`.
pub fn relation_with(
    k: &KripkeStructure,
    p: &Program,
    atom: &dyn Fn(&str) -> Result<Relation, SemanticsError>,
) -> Result<Relation, SemanticsError> {
    Ok(match p {
        Program::Atomic(a) => atom(a)?,
        Program::Seq(a, b) => relation_with(k, a, atom)?.compose(&relation_with(k, b, atom)?),
        Program::Union(a, b) => relation_with(k, a, atom)?.union(&relation_with(k, b, atom)?),
        Program::Inter(a, b) => {
            relation_with(k, a, atom)?.intersect(&relation_with(k, b, atom)?)
        }
        Program::Test(f) => Relation::identity_on(k.size(), formula_set(k, f)?),
    })
}

pub fn eval(k: &KripkeStructure, u: World, f: &Formula) -> Result<bool, SemanticsError> {
    if u >= k.size() {
        return Err(SemanticsError::UnknownWorld(format!("#{u}")));
    }
    Ok(formula_set(k, f)? >> u & 1 == 1)
}
