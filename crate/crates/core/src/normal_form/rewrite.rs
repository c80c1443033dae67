//! Bottom-up rewriting into normal form.
//!
//! Children are normalised before their parent, so every rule fires on a node
//! whose children are already in shape. Inside a program, `+` is lifted to the
//! top (innermost first) and removed at the enclosing diamond with `(D)`. A
//! union-free program is kept as a left-nested chain of factors alternating
//! forward/cyclic; junctions are repaired by `pad` and `merge`, and cyclic end
//! factors are floated out of intersections with `(T2)`/`(T3)`.
//!
//! Termination: union lifting only moves `+` upwards; chain repair recurses on
//! the right operand's length; intersection floating strictly shortens one
//! operand per `(T2)`/`(T3)` and fires `(Cm)` at most once per node.

use super::{cyc_to_test, RewriteStep, RewriteTrace, Rule};
use crate::syntax::{Formula, Program, Term};

/// Rewrite `f` so that every program under a diamond is forward or a plain
/// loop, with the trace of rule applications.
pub fn normalize(f: &Formula) -> (Formula, RewriteTrace) {
    let mut rw = Rewriter::default();
    let out = rw.formula(f, &[]);
    (out, RewriteTrace { steps: rw.steps })
}

/// Rewrite a program into a union of union-free programs, each of which is
/// cyclic, forward, or a forward chain with cyclic end factors.
pub fn normalize_program_in_context(p: &Program) -> (Program, RewriteTrace) {
    let mut rw = Rewriter::default();
    let out = rw.program(p, &[]);
    (out, RewriteTrace { steps: rw.steps })
}

fn at(base: &[usize], tail: &[usize]) -> Vec<usize> {
    let mut v = base.to_vec();
    v.extend_from_slice(tail);
    v
}

/// Cyclic factor of a normalised chain.
fn cyc(p: &Program) -> bool {
    match p {
        Program::Test(_) => true,
        Program::Inter(_, b) => matches!(**b, Program::Test(_)),
        _ => false,
    }
}

fn last(p: &Program) -> &Program {
    match p {
        Program::Seq(_, b) => b,
        _ => p,
    }
}

fn first(p: &Program) -> &Program {
    match p {
        Program::Seq(a, _) => first(a),
        _ => p,
    }
}

/// `(first factor, rest)` of a left-nested chain with at least two factors.
fn split_first(p: &Program) -> (Program, Program) {
    match p {
        Program::Seq(a, b) => match &**a {
            Program::Seq(..) => {
                let (h, r) = split_first(a);
                (h, Program::seq(r, (**b).clone()))
            }
            _ => ((**a).clone(), (**b).clone()),
        },
        _ => unreachable!("split_first on a single factor"),
    }
}

fn first_path(p: &Program, base: &[usize]) -> Vec<usize> {
    let mut v = base.to_vec();
    let mut cur = p;
    while let Program::Seq(a, _) = cur {
        v.push(0);
        cur = a;
    }
    v
}

fn test_body(p: &Program) -> &Formula {
    match p {
        Program::Test(f) => f,
        _ => unreachable!("not a test"),
    }
}

#[derive(Default)]
struct Rewriter {
    steps: Vec<RewriteStep>,
}

impl Rewriter {
    fn record(&mut self, rule: Rule, path: &[usize], before: Term, after: Term) {
        debug_assert_ne!(before, after, "{rule} must change the term");
        self.steps.push(RewriteStep {
            rule,
            path: path.to_vec(),
            before,
            after,
        });
    }

    fn rec_p(&mut self, rule: Rule, path: &[usize], before: Program, after: Program) -> Program {
        self.record(rule, path, Term::Program(before), Term::Program(after.clone()));
        after
    }

    fn rec_f(&mut self, rule: Rule, path: &[usize], before: Formula, after: Formula) -> Formula {
        self.record(rule, path, Term::Formula(before), Term::Formula(after.clone()));
        after
    }

    fn formula(&mut self, f: &Formula, p: &[usize]) -> Formula {
        match f {
            Formula::True | Formula::Prop(_) => f.clone(),
            Formula::Not(g) => Formula::not(self.formula(g, &at(p, &[0]))),
            Formula::Or(a, b) => {
                let a = self.formula(a, &at(p, &[0]));
                let b = self.formula(b, &at(p, &[1]));
                Formula::or(a, b)
            }
            Formula::Diamond(prog, g) => {
                let prog = self.program(prog, &at(p, &[0]));
                let g = self.formula(g, &at(p, &[1]));
                self.eliminate(prog, g, p)
            }
        }
    }

    /// `<prog>g` where `prog` is a union of normalised union-free programs.
    fn eliminate(&mut self, prog: Program, g: Formula, p: &[usize]) -> Formula {
        match prog {
            Program::Union(x, y) => {
                let before = Formula::diamond(Program::Union(x.clone(), y.clone()), g.clone());
                let after = Formula::or(Formula::diamond((*x).clone(), g.clone()), Formula::diamond((*y).clone(), g.clone()));
                self.rec_f(Rule::Cup, p, before, after);
                let l = self.eliminate(*x, g.clone(), &at(p, &[0]));
                let r = self.eliminate(*y, g, &at(p, &[1]));
                Formula::or(l, r)
            }
            other => self.diamond(other, g, p),
        }
    }

    /// `<prog>g` with `prog` a normalised union-free program: peel cyclic end
    /// factors off and turn them into conjuncts or loops.
    fn diamond(&mut self, prog: Program, g: Formula, p: &[usize]) -> Formula {
        match &prog {
            Program::Seq(r, c) if cyc(c) => {
                let after = Formula::diamond((**r).clone(), Formula::diamond((**c).clone(), g.clone()));
                self.rec_f(Rule::SeqDiamond, p, Formula::diamond(prog.clone(), g.clone()), after);
                let inner = self.diamond((**c).clone(), g, &at(p, &[1]));
                self.diamond((**r).clone(), inner, p)
            }
            Program::Seq(..) if cyc(first(&prog)) => {
                let (c, r) = split_first(&prog);
                let after = Formula::diamond(c.clone(), Formula::diamond(r.clone(), g.clone()));
                self.rec_f(Rule::SeqDiamond, p, Formula::diamond(prog.clone(), g.clone()), after);
                let inner = self.diamond(r, g, &at(p, &[1]));
                self.diamond(c, inner, p)
            }
            Program::Test(psi) => {
                let after = Formula::and((**psi).clone(), g.clone());
                self.rec_f(Rule::TestDiamond, p, Formula::diamond(prog.clone(), g), after)
            }
            Program::Inter(fw, t) if cyc(&prog) && !t.is_skip() => {
                let after = Formula::diamond(
                    Program::loop_of((**fw).clone()),
                    Formula::and(test_body(t).clone(), g.clone()),
                );
                self.rec_f(Rule::LoopTest, p, Formula::diamond(prog.clone(), g), after)
            }
            _ => Formula::diamond(prog, g),
        }
    }

    fn program(&mut self, prog: &Program, p: &[usize]) -> Program {
        match prog {
            Program::Atomic(_) => prog.clone(),
            Program::Test(f) => Program::test(self.formula(f, &at(p, &[0]))),
            Program::Union(a, b) => {
                let a = self.program(a, &at(p, &[0]));
                let b = self.program(b, &at(p, &[1]));
                Program::union(a, b)
            }
            Program::Seq(a, b) => {
                let a = self.program(a, &at(p, &[0]));
                let b = self.program(b, &at(p, &[1]));
                self.seq_lift(a, b, p)
            }
            Program::Inter(a, b) => {
                let a = self.program(a, &at(p, &[0]));
                let b = self.program(b, &at(p, &[1]));
                self.inter_lift(a, b, p)
            }
        }
    }

    fn seq_lift(&mut self, x: Program, y: Program, p: &[usize]) -> Program {
        if let Program::Union(x1, x2) = &x {
            let after = Program::union(Program::seq((**x1).clone(), y.clone()), Program::seq((**x2).clone(), y.clone()));
            self.rec_p(Rule::Dist3, p, Program::seq(x.clone(), y.clone()), after);
            let l = self.seq_lift((**x1).clone(), y.clone(), &at(p, &[0]));
            let r = self.seq_lift((**x2).clone(), y, &at(p, &[1]));
            return Program::union(l, r);
        }
        if let Program::Union(y1, y2) = &y {
            let after = Program::union(Program::seq(x.clone(), (**y1).clone()), Program::seq(x.clone(), (**y2).clone()));
            self.rec_p(Rule::Dist4, p, Program::seq(x.clone(), y.clone()), after);
            let l = self.seq_lift(x.clone(), (**y1).clone(), &at(p, &[0]));
            let r = self.seq_lift(x, (**y2).clone(), &at(p, &[1]));
            return Program::union(l, r);
        }
        self.seq_of(x, y, p)
    }

    fn inter_lift(&mut self, x: Program, y: Program, p: &[usize]) -> Program {
        let (x, y) = if matches!(x, Program::Union(..)) && !matches!(y, Program::Union(..)) {
            self.rec_p(Rule::Comm, p, Program::inter(x.clone(), y.clone()), Program::inter(y.clone(), x.clone()));
            (y, x)
        } else {
            (x, y)
        };
        if let Program::Union(y1, y2) = &y {
            let after = Program::union(Program::inter(x.clone(), (**y1).clone()), Program::inter(x.clone(), (**y2).clone()));
            self.rec_p(Rule::Dist1, p, Program::inter(x.clone(), y.clone()), after);
            let l = self.inter_lift(x.clone(), (**y1).clone(), &at(p, &[0]));
            let r = self.inter_lift(x, (**y2).clone(), &at(p, &[1]));
            return Program::union(l, r);
        }
        self.inter_of(x, y, p)
    }

    /// `x ; y` for normalised union-free chains.
    fn seq_of(&mut self, x: Program, y: Program, p: &[usize]) -> Program {
        match y {
            Program::Seq(y1, y2) => {
                let before = Program::seq(x.clone(), Program::Seq(y1.clone(), y2.clone()));
                let after = Program::seq(Program::seq(x.clone(), (*y1).clone()), (*y2).clone());
                self.rec_p(Rule::SeqAssoc, p, before, after);
                let left = self.seq_of(x, *y1, &at(p, &[0]));
                self.junction(left, *y2, p)
            }
            y => self.junction(x, y, p),
        }
    }

    /// `z ; y` for a normalised chain `z` and a single factor `y`.
    fn junction(&mut self, z: Program, y: Program, p: &[usize]) -> Program {
        let lz = last(&z).clone();
        match (cyc(&lz), cyc(&y)) {
            (false, false) => {
                let after = Program::seq(Program::seq(z.clone(), Program::skip()), y.clone());
                self.rec_p(Rule::Pad, p, Program::seq(z, y), after)
            }
            (true, true) => {
                let lz_path = if matches!(z, Program::Seq(..)) { at(p, &[0, 1]) } else { at(p, &[0]) };
                let t1 = self.as_test(lz, &lz_path);
                let t2 = self.as_test(y, &at(p, &[1]));
                let z = match z {
                    Program::Seq(z0, _) => Program::seq(*z0, t1.clone()),
                    _ => t1.clone(),
                };
                let merged = Program::test(Formula::and(test_body(&t1).clone(), test_body(&t2).clone()));
                let after = match &z {
                    Program::Seq(z0, _) => Program::seq((**z0).clone(), merged),
                    _ => merged,
                };
                self.rec_p(Rule::Merge, p, Program::seq(z, t2), after)
            }
            _ => Program::seq(z, y),
        }
    }

    /// A cyclic factor as a plain test, via `(T)` when it carries a loop.
    fn as_test(&mut self, c: Program, p: &[usize]) -> Program {
        match c {
            Program::Test(_) => c,
            _ => {
                let t = Program::test(cyc_to_test(&c).expect("cyclic factor"));
                self.rec_p(Rule::CycToTest, p, c, t)
            }
        }
    }

    /// `x & y` for normalised union-free chains.
    fn inter_of(&mut self, x: Program, y: Program, p: &[usize]) -> Program {
        if let Program::Seq(..) = &x {
            if cyc(first(&x)) {
                let c = first(&x).clone();
                let t = self.as_test(c, &first_path(&x, &at(p, &[0])));
                let (_, rest) = split_first(&x);
                let x = replace_first(&x, t.clone());
                let after = Program::seq(t.clone(), Program::inter(rest.clone(), y.clone()));
                self.rec_p(Rule::TestLeft, p, Program::inter(x, y.clone()), after);
                let m = self.inter_of(rest, y, &at(p, &[1]));
                return self.seq_of(t, m, p);
            }
            if let Program::Seq(r, c) = &x {
                if cyc(c) {
                    let t = self.as_test((**c).clone(), &at(p, &[0, 1]));
                    let before = Program::inter(Program::seq((**r).clone(), t.clone()), y.clone());
                    let after = Program::seq(Program::inter((**r).clone(), y.clone()), t.clone());
                    self.rec_p(Rule::TestRight, p, before, after);
                    let m = self.inter_of((**r).clone(), y, &at(p, &[0]));
                    return self.junction(m, t, p);
                }
            }
        }
        if let Program::Seq(..) = &y {
            if cyc(first(&y)) || cyc(last(&y)) {
                self.rec_p(Rule::Comm, p, Program::inter(x.clone(), y.clone()), Program::inter(y.clone(), x.clone()));
                return self.inter_of(y, x, p);
            }
        }
        match (cyc(&x), cyc(&y)) {
            (false, false) => Program::inter(x, y),
            (false, true) => match y {
                Program::Inter(g, t) => {
                    let before = Program::inter(x.clone(), Program::Inter(g.clone(), t.clone()));
                    let after = Program::inter(Program::inter(x, *g), *t);
                    self.rec_p(Rule::Assoc, p, before, after)
                }
                y => Program::inter(x, y),
            },
            (true, false) => {
                self.rec_p(Rule::Comm, p, Program::inter(x.clone(), y.clone()), Program::inter(y.clone(), x.clone()));
                self.inter_of(y, x, p)
            }
            (true, true) => {
                let (fx, tx) = cyc_parts(&x);
                let (fy, ty) = cyc_parts(&y);
                let test = Program::test(Formula::and(tx, ty));
                let after = match (fx, fy) {
                    (Some(a), Some(b)) => Program::inter(Program::inter(a, b), test),
                    (Some(a), None) | (None, Some(a)) => Program::inter(a, test),
                    (None, None) => test,
                };
                self.rec_p(Rule::Meet, p, Program::inter(x, y), after)
            }
        }
    }
}

fn cyc_parts(c: &Program) -> (Option<Program>, Formula) {
    match c {
        Program::Test(f) => (None, (**f).clone()),
        Program::Inter(a, b) => (Some((**a).clone()), test_body(b).clone()),
        _ => unreachable!("not a cyclic factor"),
    }
}

fn replace_first(p: &Program, new: Program) -> Program {
    match p {
        Program::Seq(a, b) => Program::seq(replace_first(a, new), (**b).clone()),
        _ => new,
    }
}
