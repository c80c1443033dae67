use super::ast::{Formula, Path, Polarity, Program};

/// Replace every occurrence of the proposition `p` by `replacement`,
/// including occurrences inside tests.
pub fn usub(f: &Formula, replacement: &Formula, p: &str) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::Prop(q) if q == p => replacement.clone(),
        Formula::Prop(q) => Formula::Prop(q.clone()),
        Formula::Not(g) => Formula::not(usub(g, replacement, p)),
        Formula::Or(a, b) => Formula::or(usub(a, replacement, p), usub(b, replacement, p)),
        Formula::Diamond(prog, body) => Formula::diamond(
            usub_program(prog, replacement, p),
            usub(body, replacement, p),
        ),
    }
}

pub fn usub_program(prog: &Program, replacement: &Formula, p: &str) -> Program {
    match prog {
        Program::Atomic(a) => Program::Atomic(a.clone()),
        Program::Seq(a, b) => Program::seq(
            usub_program(a, replacement, p),
            usub_program(b, replacement, p),
        ),
        Program::Union(a, b) => Program::union(
            usub_program(a, replacement, p),
            usub_program(b, replacement, p),
        ),
        Program::Inter(a, b) => Program::inter(
            usub_program(a, replacement, p),
            usub_program(b, replacement, p),
        ),
        Program::Test(g) => Program::test(usub(g, replacement, p)),
    }
}

/// Positions of `Diamond(old, _)` with the parity of the negations above
/// them. Tests are not entered, so negations inside a test never count.
pub fn polarity_of_occurrences(f: &Formula, old: &Program) -> Vec<(Path, Polarity)> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(f, old, Polarity::Positive, &mut path, &mut out);
    out
}

fn walk(
    f: &Formula,
    old: &Program,
    pol: Polarity,
    path: &mut Path,
    out: &mut Vec<(Path, Polarity)>,
) {
    match f {
        Formula::True | Formula::Prop(_) => {}
        Formula::Not(g) => {
            path.push(0);
            walk(g, old, pol.flip(), path, out);
            path.pop();
        }
        Formula::Or(a, b) => {
            path.push(0);
            walk(a, old, pol, path, out);
            path.pop();
            path.push(1);
            walk(b, old, pol, path, out);
            path.pop();
        }
        Formula::Diamond(prog, body) => {
            if **prog == *old {
                out.push((path.clone(), pol));
            }
            path.push(1);
            walk(body, old, pol, path, out);
            path.pop();
        }
    }
}

/// Replace `<old>` by `<new>` at every positive occurrence.
pub fn psub(f: &Formula, old: &Program, new: &Program) -> Formula {
    psub_at(f, old, new, Polarity::Positive)
}

fn psub_at(f: &Formula, old: &Program, new: &Program, pol: Polarity) -> Formula {
    match f {
        Formula::True | Formula::Prop(_) => f.clone(),
        Formula::Not(g) => Formula::not(psub_at(g, old, new, pol.flip())),
        Formula::Or(a, b) => Formula::or(psub_at(a, old, new, pol), psub_at(b, old, new, pol)),
        Formula::Diamond(prog, body) => {
            let prog = if pol == Polarity::Positive && **prog == *old {
                new.clone()
            } else {
                (**prog).clone()
            };
            Formula::diamond(prog, psub_at(body, old, new, pol))
        }
    }
}
