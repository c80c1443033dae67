//! Cyclic/forward program classes and the traced rewrite into normal form.
//!
//! Forward programs: `a | F & F | F ; C ; F`. Cyclic programs: `phi? | F & phi?`.
//! Sequences are read modulo associativity: a `;`-chain is forward when its
//! flattened factors alternate forward/cyclic and start and end forward.

mod rewrite;

use std::fmt;

use thiserror::Error;

use crate::syntax::{render, render_program, Formula, Path, Program, Term};

pub use rewrite::{normalize, normalize_program_in_context};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("not a cyclic program: {0}")]
    NotCyclic(String),
    #[error("trace step {index} does not apply: {reason}")]
    Replay { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProgramClass {
    Cyc,
    Forw,
    Neither,
}

pub fn classify(p: &Program) -> ProgramClass {
    if is_cyc(p) {
        ProgramClass::Cyc
    } else if is_forw(p) {
        ProgramClass::Forw
    } else {
        ProgramClass::Neither
    }
}

fn is_cyc(p: &Program) -> bool {
    match p {
        Program::Test(_) => true,
        Program::Inter(a, b) => matches!(**b, Program::Test(_)) && is_forw(a),
        _ => false,
    }
}

fn is_forw(p: &Program) -> bool {
    match p {
        Program::Atomic(_) => true,
        Program::Inter(a, b) => is_forw(a) && is_forw(b),
        Program::Seq(..) => {
            let fs = p.seq_factors();
            fs.len() % 2 == 1
                && fs.iter().enumerate().all(|(i, f)| {
                    if i % 2 == 0 {
                        !matches!(f, Program::Seq(..)) && is_forw(f)
                    } else {
                        is_cyc(f)
                    }
                })
        }
        Program::Union(..) | Program::Test(_) => false,
    }
}

/// The test body equivalent to a cyclic program: `phi` for `phi?` and
/// `<F^>true & phi` for `F & phi?`.
pub fn cyc_to_test(p: &Program) -> Result<Formula, NormalFormError> {
    if !is_cyc(p) {
        return Err(NormalFormError::NotCyclic(render_program(p)));
    }
    Ok(match p {
        Program::Test(f) => (**f).clone(),
        Program::Inter(a, b) => match &**b {
            Program::Test(f) => Formula::and(
                Formula::diamond(Program::loop_of((**a).clone()), Formula::True),
                (**f).clone(),
            ),
            _ => unreachable!("checked by is_cyc"),
        },
        _ => unreachable!("checked by is_cyc"),
    })
}

/// Every program under a diamond, tests included, is cyclic or forward.
pub fn programs_classified(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::Prop(_) => true,
        Formula::Not(g) => programs_classified(g),
        Formula::Or(a, b) => programs_classified(a) && programs_classified(b),
        Formula::Diamond(p, g) => {
            classify(p) != ProgramClass::Neither && tests_classified(p) && programs_classified(g)
        }
    }
}

fn tests_classified(p: &Program) -> bool {
    match p {
        Program::Atomic(_) => true,
        Program::Test(f) => programs_classified(f),
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            tests_classified(a) && tests_classified(b)
        }
    }
}

/// `programs_classified`, and no diamond carries a cyclic program other than
/// a plain loop `F^`.
pub fn is_normal(f: &Formula) -> bool {
    fn diamonds_ok(f: &Formula) -> bool {
        match f {
            Formula::True | Formula::Prop(_) => true,
            Formula::Not(g) => diamonds_ok(g),
            Formula::Or(a, b) => diamonds_ok(a) && diamonds_ok(b),
            Formula::Diamond(p, g) => {
                let head = match classify(p) {
                    ProgramClass::Forw => true,
                    ProgramClass::Cyc => p.as_loop().is_some(),
                    ProgramClass::Neither => false,
                };
                head && tests_ok(p) && diamonds_ok(g)
            }
        }
    }
    fn tests_ok(p: &Program) -> bool {
        match p {
            Program::Atomic(_) => true,
            Program::Test(f) => diamonds_ok(f),
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => tests_ok(a) && tests_ok(b),
        }
    }
    programs_classified(f) && diamonds_ok(f)
}

/// Name of the law justifying one rewrite step. The first group are axiom
/// schemes; `assoc`, `pad`, `merge` and `meet` are derived from `(;)`, `(?)`,
/// `(A)`, `(Cm)` and `(T2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Cup,
    Dist1,
    Dist3,
    Dist4,
    Comm,
    Assoc,
    CycToTest,
    LoopTest,
    TestRight,
    TestLeft,
    TestDiamond,
    SeqDiamond,
    SeqAssoc,
    Pad,
    Merge,
    Meet,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Cup => "D",
            Rule::Dist1 => "D1",
            Rule::Dist3 => "D3",
            Rule::Dist4 => "D4",
            Rule::Comm => "Cm",
            Rule::Assoc => "A",
            Rule::CycToTest => "T",
            Rule::LoopTest => "T1",
            Rule::TestRight => "T2",
            Rule::TestLeft => "T3",
            Rule::TestDiamond => "?",
            Rule::SeqDiamond => ";",
            Rule::SeqAssoc => "assoc",
            Rule::Pad => "pad",
            Rule::Merge => "merge",
            Rule::Meet => "meet",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: Rule,
    pub path: Path,
    pub before: Term,
    pub after: Term,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rule_names(&self) -> Vec<&'static str> {
        self.steps.iter().map(|s| s.rule.name()).collect()
    }

    /// Apply the steps in order, checking each `before` against the term
    /// found at its path.
    pub fn replay(&self, start: &Term) -> Result<Term, NormalFormError> {
        let mut cur = start.clone();
        for (index, s) in self.steps.iter().enumerate() {
            let found = cur.subterm(&s.path).ok_or_else(|| NormalFormError::Replay {
                index,
                reason: format!("no subterm at {:?}", s.path),
            })?;
            if found != s.before {
                return Err(NormalFormError::Replay {
                    index,
                    reason: format!("expected {} at {:?}, found {}", show(&s.before), s.path, show(&found)),
                });
            }
            cur = cur.replace_at(&s.path, s.after.clone()).ok_or_else(|| NormalFormError::Replay {
                index,
                reason: "replacement has the wrong sort".into(),
            })?;
        }
        Ok(cur)
    }

    pub fn replay_formula(&self, f: &Formula) -> Result<Formula, NormalFormError> {
        match self.replay(&Term::Formula(f.clone()))? {
            Term::Formula(g) => Ok(g),
            Term::Program(_) => Err(NormalFormError::Replay {
                index: self.steps.len(),
                reason: "result is a program".into(),
            }),
        }
    }
}

pub(crate) fn show(t: &Term) -> String {
    match t {
        Term::Formula(f) => render(f),
        Term::Program(p) => render_program(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_program};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn classify_bases() {
        assert_eq!(classify(&prog("a")), ProgramClass::Forw);
        assert_eq!(classify(&prog("p?")), ProgramClass::Cyc);
        assert_eq!(classify(&prog("a + b")), ProgramClass::Neither);
        assert_eq!(classify(&prog("a & b")), ProgramClass::Forw);
        assert_eq!(classify(&prog("a^")), ProgramClass::Cyc);
        assert_eq!(classify(&prog("(a & b) & p?")), ProgramClass::Cyc);
    }

    #[test]
    fn classify_sequences() {
        assert_eq!(classify(&prog("a;b")), ProgramClass::Neither);
        assert_eq!(classify(&prog("a;true?;b")), ProgramClass::Forw);
        assert_eq!(classify(&prog("a;(p?;b)")), ProgramClass::Forw);
        assert_eq!(classify(&prog("a;p?;b;a^;c")), ProgramClass::Forw);
        assert_eq!(classify(&prog("p?;a")), ProgramClass::Neither);
        assert_eq!(classify(&prog("a;p?;q?;b")), ProgramClass::Neither);
        assert_eq!(classify(&prog("p? & a")), ProgramClass::Neither);
        assert_eq!(classify(&prog("a & (b & p?)")), ProgramClass::Neither);
        assert_eq!(classify(&prog("(a;p?;b) & q?")), ProgramClass::Cyc);
    }

    #[test]
    fn cyc_to_test_examples() {
        assert_eq!(cyc_to_test(&prog("p?")).unwrap(), parse("p").unwrap());
        assert_eq!(cyc_to_test(&prog("a & p?")).unwrap(), parse("<a^>true & p").unwrap());
        assert_eq!(
            cyc_to_test(&prog("(a & b) & p?")).unwrap(),
            parse("<(a & b)^>true & p").unwrap()
        );
        assert!(matches!(cyc_to_test(&prog("a")), Err(NormalFormError::NotCyclic(_))));
    }
}
