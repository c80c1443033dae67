use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A formula in core form. Derived connectives are expanded into these four
/// constructors (plus the constant `True`) at construction time.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    True,
    Prop(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Diamond(Box<Program>, Box<Formula>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Program {
    Atomic(String),
    Seq(Box<Program>, Box<Program>),
    Union(Box<Program>, Box<Program>),
    Inter(Box<Program>, Box<Program>),
    Test(Box<Formula>),
}

/// Either sort, used wherever a position may hold a formula or a program
/// (rewrite traces, scheme bindings).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Formula(Formula),
    Program(Program),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Kind of a program judgement: inclusion or mutual inclusion.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum JudgementKind {
    Implies,
    Equiv,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Judgement {
    pub kind: JudgementKind,
    pub left: Program,
    pub right: Program,
}

impl Judgement {
    pub fn new(kind: JudgementKind, left: Program, right: Program) -> Self {
        Judgement { kind, left, right }
    }
}

/// Child index path from a root term. Formula children: `Not` → 0,
/// `Or` → 0/1, `Diamond` → 0 (program) / 1 (formula). Program children:
/// binary operators → 0/1, `Test` → 0.
pub type Path = Vec<usize>;

impl Formula {
    pub fn prop(name: impl Into<String>) -> Formula {
        Formula::Prop(name.into())
    }

    pub fn top() -> Formula {
        Formula::True
    }

    pub fn bot() -> Formula {
        Formula::not(Formula::True)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn diamond(p: Program, f: Formula) -> Formula {
        Formula::Diamond(Box::new(p), Box::new(f))
    }

    pub fn boxed(p: Program, f: Formula) -> Formula {
        Formula::not(Formula::diamond(p, Formula::not(f)))
    }

    /// Conjunction of all formulas, `⊤` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::Or(a, b) = inner.as_ref() {
                if let (Formula::Not(x), Formula::Not(y)) = (a.as_ref(), b.as_ref()) {
                    return Some((x, y));
                }
            }
        }
        None
    }

    pub fn as_implies(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Or(a, b) = self {
            if let Formula::Not(x) = a.as_ref() {
                return Some((x, b));
            }
        }
        None
    }

    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        let (l, r) = self.as_and()?;
        let (a, b) = l.as_implies()?;
        let (b2, a2) = r.as_implies()?;
        if a == a2 && b == b2 {
            Some((a, b))
        } else {
            None
        }
    }

    pub fn as_box(&self) -> Option<(&Program, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::Diamond(p, body) = inner.as_ref() {
                if let Formula::Not(f) = body.as_ref() {
                    return Some((p, f));
                }
            }
        }
        None
    }

    pub fn is_bot(&self) -> bool {
        matches!(self, Formula::Not(inner) if **inner == Formula::True)
    }

    /// Nesting depth of the core tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Prop(_) => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
            Formula::Diamond(p, f) => 1 + p.depth().max(f.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Prop(_) => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::Or(a, b) => 1 + a.size() + b.size(),
            Formula::Diamond(p, f) => 1 + p.size() + f.size(),
        }
    }

    pub fn collect_symbols(&self, props: &mut BTreeSet<String>, programs: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Prop(p) => {
                props.insert(p.clone());
            }
            Formula::Not(f) => f.collect_symbols(props, programs),
            Formula::Or(a, b) => {
                a.collect_symbols(props, programs);
                b.collect_symbols(props, programs);
            }
            Formula::Diamond(p, f) => {
                p.collect_symbols(props, programs);
                f.collect_symbols(props, programs);
            }
        }
    }

    pub fn vocabulary(&self) -> super::Vocabulary {
        let mut props = BTreeSet::new();
        let mut programs = BTreeSet::new();
        self.collect_symbols(&mut props, &mut programs);
        super::Vocabulary { props, programs }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<Term> {
        Term::Formula(self.clone()).subterm(path)
    }
}

impl Program {
    pub fn atomic(name: impl Into<String>) -> Program {
        Program::Atomic(name.into())
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn union(a: Program, b: Program) -> Program {
        Program::Union(Box::new(a), Box::new(b))
    }

    pub fn inter(a: Program, b: Program) -> Program {
        Program::Inter(Box::new(a), Box::new(b))
    }

    pub fn test(f: Formula) -> Program {
        Program::Test(Box::new(f))
    }

    pub fn skip() -> Program {
        Program::test(Formula::True)
    }

    /// `α^⟲`, stored as `α ∩ ⊤?`.
    pub fn loop_of(a: Program) -> Program {
        Program::inter(a, Program::skip())
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Program::Test(f) if **f == Formula::True)
    }

    pub fn as_loop(&self) -> Option<&Program> {
        match self {
            Program::Inter(a, b) if b.is_skip() => Some(a),
            _ => None,
        }
    }

    /// Left-associated sequence of the given factors. Panics on empty input.
    pub fn seq_all(items: impl IntoIterator<Item = Program>) -> Program {
        let mut it = items.into_iter();
        let first = it.next().expect("seq_all needs at least one factor");
        it.fold(first, Program::seq)
    }

    /// Factors of a `;`-chain, ignoring association.
    pub fn seq_factors(&self) -> Vec<&Program> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Program, out: &mut Vec<&'a Program>) {
            if let Program::Seq(a, b) = p {
                go(a, out);
                go(b, out);
            } else {
                out.push(p);
            }
        }
        go(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Program::Atomic(_) => 0,
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Program::Test(f) => 1 + f.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Program::Atomic(_) => 1,
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
                1 + a.size() + b.size()
            }
            Program::Test(f) => 1 + f.size(),
        }
    }

    pub fn contains_seq(&self) -> bool {
        match self {
            Program::Seq(..) => true,
            Program::Union(a, b) | Program::Inter(a, b) => a.contains_seq() || b.contains_seq(),
            Program::Atomic(_) | Program::Test(_) => false,
        }
    }

    pub fn contains_union(&self) -> bool {
        match self {
            Program::Union(..) => true,
            Program::Seq(a, b) | Program::Inter(a, b) => a.contains_union() || b.contains_union(),
            Program::Atomic(_) | Program::Test(_) => false,
        }
    }

    pub fn collect_symbols(&self, props: &mut BTreeSet<String>, programs: &mut BTreeSet<String>) {
        match self {
            Program::Atomic(a) => {
                programs.insert(a.clone());
            }
            Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
                a.collect_symbols(props, programs);
                b.collect_symbols(props, programs);
            }
            Program::Test(f) => f.collect_symbols(props, programs),
        }
    }

    pub fn vocabulary(&self) -> super::Vocabulary {
        let mut props = BTreeSet::new();
        let mut programs = BTreeSet::new();
        self.collect_symbols(&mut props, &mut programs);
        super::Vocabulary { props, programs }
    }
}

impl Term {
    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Term::Formula(f) => Some(f),
            Term::Program(_) => None,
        }
    }

    pub fn as_program(&self) -> Option<&Program> {
        match self {
            Term::Program(p) => Some(p),
            Term::Formula(_) => None,
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<Term> {
        let mut cur = self.clone();
        for &i in path {
            cur = cur.child(i)?;
        }
        Some(cur)
    }

    fn child(&self, i: usize) -> Option<Term> {
        match (self, i) {
            (Term::Formula(Formula::Not(f)), 0) => Some(Term::Formula((**f).clone())),
            (Term::Formula(Formula::Or(a, _)), 0) => Some(Term::Formula((**a).clone())),
            (Term::Formula(Formula::Or(_, b)), 1) => Some(Term::Formula((**b).clone())),
            (Term::Formula(Formula::Diamond(p, _)), 0) => Some(Term::Program((**p).clone())),
            (Term::Formula(Formula::Diamond(_, f)), 1) => Some(Term::Formula((**f).clone())),
            (Term::Program(Program::Seq(a, _) | Program::Union(a, _) | Program::Inter(a, _)), 0) => {
                Some(Term::Program((**a).clone()))
            }
            (Term::Program(Program::Seq(_, b) | Program::Union(_, b) | Program::Inter(_, b)), 1) => {
                Some(Term::Program((**b).clone()))
            }
            (Term::Program(Program::Test(f)), 0) => Some(Term::Formula((**f).clone())),
            _ => None,
        }
    }

    /// Replace the subterm at `path`. Fails if the path is invalid or the
    /// replacement has the wrong sort.
    pub fn replace_at(&self, path: &[usize], new: Term) -> Option<Term> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(new);
        };
        let child = self.child(first)?;
        let replaced = child.replace_at(rest, new)?;
        Some(match (self, first, replaced) {
            (Term::Formula(Formula::Not(_)), 0, Term::Formula(x)) => Term::Formula(Formula::not(x)),
            (Term::Formula(Formula::Or(_, b)), 0, Term::Formula(x)) => {
                Term::Formula(Formula::or(x, (**b).clone()))
            }
            (Term::Formula(Formula::Or(a, _)), 1, Term::Formula(x)) => {
                Term::Formula(Formula::or((**a).clone(), x))
            }
            (Term::Formula(Formula::Diamond(_, f)), 0, Term::Program(x)) => {
                Term::Formula(Formula::diamond(x, (**f).clone()))
            }
            (Term::Formula(Formula::Diamond(p, _)), 1, Term::Formula(x)) => {
                Term::Formula(Formula::diamond((**p).clone(), x))
            }
            (Term::Program(p), i, Term::Program(x)) if i < 2 => Term::Program(rebuild_binary(p, i, x)?),
            (Term::Program(Program::Test(_)), 0, Term::Formula(x)) => Term::Program(Program::test(x)),
            _ => return None,
        })
    }
}

fn rebuild_binary(p: &Program, i: usize, x: Program) -> Option<Program> {
    let (a, b) = match p {
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => (a, b),
        _ => return None,
    };
    let (l, r) = if i == 0 { (x, (**b).clone()) } else { ((**a).clone(), x) };
    Some(match p {
        Program::Seq(..) => Program::seq(l, r),
        Program::Union(..) => Program::union(l, r),
        Program::Inter(..) => Program::inter(l, r),
        _ => unreachable!(),
    })
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render_program(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Formula(x) => x.fmt(f),
            Term::Program(x) => x.fmt(f),
        }
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            JudgementKind::Implies => "=>",
            JudgementKind::Equiv => "<=>",
        };
        write!(f, "{} {} {}", self.left, op, self.right)
    }
}
