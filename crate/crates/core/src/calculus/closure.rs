use std::collections::BTreeSet;
use std::fmt;

use super::{is_axiom_instance, is_tautology, Theory};
use crate::semantics::{eval, KripkeStructure, SemanticsError, World};
use crate::syntax::{Formula, Program};

/// Which closure property of a maximally consistent set failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClosureProperty {
    /// Closed under tautologies, formula axioms and MP inside the domain.
    Derivation,
    Conjunction,
    Disjunction,
    Negation,
}

impl fmt::Display for ClosureProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClosureProperty::Derivation => "derivation",
            ClosureProperty::Conjunction => "conjunction",
            ClosureProperty::Disjunction => "disjunction",
            ClosureProperty::Negation => "negation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureViolation {
    pub property: ClosureProperty,
    pub formula: Formula,
}

/// Subformulae of `fs` (through tests too), closed under one negation.
pub fn closure_domain<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    fn formula(f: &Formula, out: &mut BTreeSet<Formula>) {
        if !out.insert(f.clone()) {
            return;
        }
        match f {
            Formula::True | Formula::Prop(_) => {}
            Formula::Not(g) => formula(g, out),
            Formula::Or(a, b) => {
                formula(a, out);
                formula(b, out);
            }
            Formula::Diamond(p, g) => {
                program(p, out);
                formula(g, out);
            }
        }
    }
    fn program(p: &Program, out: &mut BTreeSet<Formula>) {
        match p {
            Program::Atomic(_) => {}
            Program::Test(f) => formula(f, out),
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
                program(a, out);
                program(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for f in fs {
        formula(f, &mut out);
    }
    let negs: Vec<Formula> = out.iter().map(|f| Formula::not(f.clone())).collect();
    out.extend(negs);
    out
}

/// The four closure properties of a maximally consistent set, restricted
/// to `domain`: a finite theory can only be judged on the formulae it is
/// asked about. Tautologies with too many atoms to tabulate are skipped.
pub fn closure_violations(t: &Theory, domain: &BTreeSet<Formula>) -> Vec<ClosureViolation> {
    let has = |f: &Formula| t.formulas.contains(f);
    let mut out = Vec::new();
    let mut push = |property, f: &Formula| {
        out.push(ClosureViolation {
            property,
            formula: f.clone(),
        })
    };
    for f in domain {
        if !has(f) && (is_tautology(f) == Ok(true) || is_axiom_instance(f).is_some()) {
            push(ClosureProperty::Derivation, f);
        }
        if let Some((a, b)) = f.as_and() {
            if has(f) != (has(a) && has(b)) {
                push(ClosureProperty::Conjunction, f);
            }
        } else if let Formula::Or(a, b) = f {
            if has(f) != (has(a) || has(b)) {
                push(ClosureProperty::Disjunction, f);
            }
        }
        let neg = Formula::not(f.clone());
        if domain.contains(&neg) && has(f) == has(&neg) {
            push(ClosureProperty::Negation, f);
        }
    }
    for imp in t.formulas.iter() {
        let Some((a, b)) = imp.as_implies() else { continue };
        if has(a) && domain.contains(b) && !has(b) {
            push(ClosureProperty::Derivation, b);
        }
    }
    out
}

/// The members of `domain` true at `w`.
pub fn world_theory(k: &KripkeStructure, w: World, domain: &BTreeSet<Formula>) -> Result<Theory, SemanticsError> {
    let mut t = Theory::default();
    for f in domain {
        if eval(k, w, f)? {
            t.formulas.insert(f.clone());
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, Vocabulary};

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn chain() -> KripkeStructure {
        let v = Vocabulary::new(["p"], ["a"]).unwrap();
        let mut k = KripkeStructure::with_size(2, &v).unwrap();
        k.add_edge("a", 0, 1).unwrap();
        k.set_true("p", 1).unwrap();
        k
    }

    #[test]
    fn world_theories_are_closed() {
        let k = chain();
        let seeds = [f("<a>p & ~p"), f("[a](p | ~p)"), f("<a>p -> [a]p"), f("<a;p?>true | [a]false")];
        let d = closure_domain(&seeds);
        for w in 0..2 {
            let t = world_theory(&k, w, &d).unwrap();
            assert_eq!(closure_violations(&t, &d), vec![], "world {w}");
        }
    }

    #[test]
    fn each_property_can_fail() {
        let d = closure_domain(&[f("p & q"), f("p | q")]);
        let kinds = |t: Theory| -> BTreeSet<ClosureProperty> {
            closure_violations(&t, &d).into_iter().map(|v| v.property).collect()
        };
        let k = kinds(Theory::new([f("p"), f("q"), f("p | q"), f("~(p & q)")]));
        assert!(k.contains(&ClosureProperty::Conjunction));
        let k = kinds(Theory::new([f("~p"), f("~q"), f("p | q")]));
        assert!(k.contains(&ClosureProperty::Disjunction));
        let k = kinds(Theory::new([f("p"), f("~p")]));
        assert!(k.contains(&ClosureProperty::Negation));
        let taut = closure_domain(&[f("p | ~p")]);
        let v = closure_violations(&Theory::new([f("p")]), &taut);
        assert!(v.contains(&ClosureViolation {
            property: ClosureProperty::Derivation,
            formula: f("p | ~p")
        }));
    }

    #[test]
    fn modus_ponens_inside_the_domain() {
        let d = closure_domain(&[f("p -> q")]);
        let v = closure_violations(&Theory::new([f("p"), f("p -> q"), f("~q")]), &d);
        assert!(v.iter().any(|x| x.property == ClosureProperty::Derivation && x.formula == f("q")));
    }

    #[test]
    fn domain_is_negation_closed() {
        let d = closure_domain(&[f("<p?>q")]);
        for g in ["<p?>q", "p", "q", "~p", "~q", "~<p?>q"] {
            assert!(d.contains(&f(g)), "{g}");
        }
        assert!(!d.contains(&f("~~p")));
        assert!(!d.contains(&f("true")));
    }
}
