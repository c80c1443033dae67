use std::collections::BTreeMap;

use crate::syntax::Formula;

/// Largest number of propositional atoms a truth table is built for.
pub const MAX_TAUT_ATOMS: usize = 20;

/// Maximal subformulae that are propositions or diamonds, in first-occurrence
/// order. `True` is a constant, not an atom.
pub fn propositional_atoms(f: &Formula) -> Vec<Formula> {
    fn go(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::True => {}
            Formula::Prop(_) | Formula::Diamond(..) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::Not(g) => go(g, out),
            Formula::Or(a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out
}

/// Truth-table check. `Err` when the table would be too large.
pub fn is_tautology(f: &Formula) -> Result<bool, String> {
    let atoms = propositional_atoms(f);
    if atoms.len() > MAX_TAUT_ATOMS {
        return Err(format!("{} atoms exceed the truth-table limit of {MAX_TAUT_ATOMS}", atoms.len()));
    }
    let index: BTreeMap<&Formula, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    Ok((0u64..1 << atoms.len()).all(|row| value(f, &index, row)))
}

fn value(f: &Formula, index: &BTreeMap<&Formula, usize>, row: u64) -> bool {
    match f {
        Formula::True => true,
        Formula::Prop(_) | Formula::Diamond(..) => row >> index[f] & 1 == 1,
        Formula::Not(g) => !value(g, index, row),
        Formula::Or(a, b) => value(a, index, row) || value(b, index, row),
    }
}
