use super::{union_free, LargeError, LargeProgram, TestSet};
use crate::syntax::{Formula, Program};

/// Re-associate every `;`-chain to the left, inside tests too.
pub fn canonical_program(p: &Program) -> Program {
    match p {
        Program::Atomic(_) => p.clone(),
        Program::Seq(..) => Program::seq_all(p.seq_factors().into_iter().map(canonical_program)),
        Program::Union(a, b) => Program::union(canonical_program(a), canonical_program(b)),
        Program::Inter(a, b) => Program::inter(canonical_program(a), canonical_program(b)),
        Program::Test(f) => Program::test(canonical_formula(f)),
    }
}

pub fn canonical_formula(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::Prop(_) => f.clone(),
        Formula::Not(g) => Formula::not(canonical_formula(g)),
        Formula::Or(a, b) => Formula::or(canonical_formula(a), canonical_formula(b)),
        Formula::Diamond(p, g) => Formula::diamond(canonical_program(p), canonical_formula(g)),
    }
}

/// Replace each test `φ?` by `{φ}?`. The program must be `∪`-free with every
/// test strictly between two non-test factors of a sequence (the padded
/// normal-form shape); loops are rejected.
pub fn lift(a: &Program) -> Result<LargeProgram, LargeError> {
    if !union_free(a) {
        return Err(LargeError::Shape(format!("{a} contains a union")));
    }
    lift_factor(a)
}

fn lift_factor(a: &Program) -> Result<LargeProgram, LargeError> {
    match a {
        Program::Atomic(x) => Ok(LargeProgram::atomic(x.clone())),
        Program::Inter(x, y) => Ok(LargeProgram::inter(lift_factor(x)?, lift_factor(y)?)),
        Program::Test(_) => Err(LargeError::Shape(format!("test {a} is not between two programs"))),
        Program::Union(..) => Err(LargeError::Shape(format!("{a} contains a union"))),
        Program::Seq(..) => {
            let fs = a.seq_factors();
            if fs.len() % 2 == 0 {
                return Err(LargeError::Shape(format!("{a} does not alternate programs and tests")));
            }
            let mut out = lift_factor(fs[0])?;
            for pair in fs[1..].chunks(2) {
                let Program::Test(phi) = pair[0] else {
                    return Err(LargeError::Shape(format!("{a}: adjacent programs need a test between them")));
                };
                if matches!(pair[1], Program::Test(_)) {
                    return Err(LargeError::Shape(format!("{a}: adjacent tests")));
                }
                out = LargeProgram::seq_test(out, [(**phi).clone()], lift_factor(pair[1])?);
            }
            Ok(out)
        }
    }
}

/// Membership modulo associativity of `;`.
pub(crate) fn contains(x: &TestSet, f: &Formula) -> bool {
    x.contains(f) || {
        let c = canonical_formula(f);
        x.iter().any(|y| canonical_formula(y) == c)
    }
}

pub(crate) fn canonical_set(x: &TestSet) -> TestSet {
    x.iter().map(canonical_formula).collect()
}

/// Whether `a` is an instance of `l`, reading sequences modulo associativity.
pub fn is_instance(a: &Program, l: &LargeProgram) -> bool {
    match l {
        LargeProgram::Atomic(x) => matches!(a, Program::Atomic(y) if x == y),
        LargeProgram::Inter(l1, l2) => match a {
            Program::Inter(a1, a2) => is_instance(a1, l1) && is_instance(a2, l2),
            _ => false,
        },
        LargeProgram::Test(x) => matches!(a, Program::Test(phi) if contains(x, phi)),
        LargeProgram::SeqTest(l1, x, l2) => {
            let fs = a.seq_factors();
            (1..fs.len().saturating_sub(1)).any(|k| {
                matches!(fs[k], Program::Test(phi) if contains(x, phi))
                    && is_instance(&join(&fs[..k]), l1)
                    && is_instance(&join(&fs[k + 1..]), l2)
            })
        }
        LargeProgram::Seq(l1, l2) => {
            let fs = a.seq_factors();
            (1..fs.len()).any(|k| is_instance(&join(&fs[..k]), l1) && is_instance(&join(&fs[k..]), l2))
        }
    }
}

fn join(fs: &[&Program]) -> Program {
    Program::seq_all(fs.iter().map(|p| (*p).clone()))
}

/// All instances, with sequences left-associated.
pub fn enumerate_instances(l: &LargeProgram) -> Vec<Program> {
    let tests = |x: &TestSet| -> Vec<Program> { x.iter().map(|f| Program::test(f.clone())).collect() };
    let product = |xs: Vec<Program>, ys: Vec<Program>, mk: &dyn Fn(Program, Program) -> Program| -> Vec<Program> {
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for x in &xs {
            for y in &ys {
                out.push(mk(x.clone(), y.clone()));
            }
        }
        out
    };
    // Re-associate the outer chain only; test bodies stay as given.
    let seq = |x: Program, y: Program| {
        let fs: Vec<&Program> = x.seq_factors().into_iter().chain(y.seq_factors()).collect();
        join(&fs)
    };
    match l {
        LargeProgram::Atomic(a) => vec![Program::atomic(a.clone())],
        LargeProgram::Test(x) => tests(x),
        LargeProgram::Inter(a, b) => product(enumerate_instances(a), enumerate_instances(b), &Program::inter),
        LargeProgram::Seq(a, b) => product(enumerate_instances(a), enumerate_instances(b), &seq),
        LargeProgram::SeqTest(a, x, b) => {
            let left = product(enumerate_instances(a), tests(x), &seq);
            product(left, enumerate_instances(b), &seq)
        }
    }
}

/// Flattened `;`-chain: alternating programs and test sets for `SeqTest`,
/// consecutive items for `Seq`.
#[derive(Debug, PartialEq)]
enum Item<'a> {
    Prog(&'a LargeProgram),
    Tests(&'a TestSet),
}

fn chain(l: &LargeProgram) -> Vec<Item<'_>> {
    fn go<'a>(l: &'a LargeProgram, out: &mut Vec<Item<'a>>) {
        match l {
            LargeProgram::SeqTest(a, x, b) => {
                go(a, out);
                out.push(Item::Tests(x));
                go(b, out);
            }
            LargeProgram::Seq(a, b) => {
                go(a, out);
                go(b, out);
            }
            LargeProgram::Test(x) => out.push(Item::Tests(x)),
            _ => out.push(Item::Prog(l)),
        }
    }
    let mut out = Vec::new();
    go(l, &mut out);
    out
}

fn has_instances(l: &LargeProgram) -> bool {
    l.instance_count() > 0
}

/// `l1 ≤ l2`: every instance of `l1` is an instance of `l2`. Decided
/// structurally: the flattened chains have the same shape and each test set
/// of `l1` is contained in the matching one of `l2`.
pub fn leq(l1: &LargeProgram, l2: &LargeProgram) -> bool {
    if !has_instances(l1) {
        return true;
    }
    leq_nonempty(l1, l2)
}

fn leq_nonempty(l1: &LargeProgram, l2: &LargeProgram) -> bool {
    let (c1, c2) = (chain(l1), chain(l2));
    if c1.len() != c2.len() {
        return false;
    }
    c1.iter().zip(&c2).all(|pair| match pair {
        (Item::Tests(x), Item::Tests(y)) => canonical_set(x).is_subset(&canonical_set(y)),
        (Item::Prog(LargeProgram::Atomic(a)), Item::Prog(LargeProgram::Atomic(b))) => a == b,
        (Item::Prog(LargeProgram::Inter(a1, a2)), Item::Prog(LargeProgram::Inter(b1, b2))) => {
            leq_nonempty(a1, b1) && leq_nonempty(a2, b2)
        }
        _ => false,
    })
}
