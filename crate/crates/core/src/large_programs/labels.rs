use std::collections::BTreeMap;

use super::{LabelledTransition, LargeLoop, LargeProgram, TestSet};
use crate::syntax::Formula;

/// Child indices from the root: `Inter` and `Seq` children are 0 and 1,
/// `SeqTest` has its programs at 0 and 2 and its test set at 1.
pub type Occurrence = Vec<usize>;

/// `(l(β), r(β))` for every program occurrence `β`, computed top-down.
pub fn left_right_sets(t: &LabelledTransition) -> BTreeMap<Occurrence, (TestSet, TestSet)> {
    fn go(
        l: &LargeProgram,
        path: &mut Occurrence,
        left: &TestSet,
        right: &TestSet,
        out: &mut BTreeMap<Occurrence, (TestSet, TestSet)>,
    ) {
        out.insert(path.clone(), (left.clone(), right.clone()));
        let mut child = |i: usize, c: &LargeProgram, left: &TestSet, right: &TestSet, out: &mut BTreeMap<_, _>| {
            path.push(i);
            go(c, path, left, right, out);
            path.pop();
        };
        match l {
            LargeProgram::Atomic(_) | LargeProgram::Test(_) => {}
            LargeProgram::Inter(a, b) => {
                child(0, a, left, right, out);
                child(1, b, left, right, out);
            }
            LargeProgram::SeqTest(a, x, b) => {
                child(0, a, left, x, out);
                child(2, b, x, right, out);
            }
            // Context programs carry no intermediate label; both halves
            // inherit the outer ones.
            LargeProgram::Seq(a, b) => {
                child(0, a, left, right, out);
                child(1, b, left, right, out);
            }
        }
    }
    let mut out = BTreeMap::new();
    go(&t.program, &mut Vec::new(), &t.left, &t.right, &mut out);
    out
}

fn skip() -> LargeProgram {
    LargeProgram::test([Formula::True])
}

/// `(lp(X), rp(X))` for every test-set occurrence `X` of the loop body,
/// starting from `lp(Φ) = rp(Φ) = ⊤?`.
pub fn loop_left_right_programs(l: &LargeLoop, phi: &TestSet) -> BTreeMap<Occurrence, (LargeProgram, LargeProgram)> {
    struct Side<'a> {
        set: &'a TestSet,
        prog: LargeProgram,
    }
    fn go(
        l: &LargeProgram,
        path: &mut Occurrence,
        left: &Side,
        right: &Side,
        out: &mut BTreeMap<Occurrence, (LargeProgram, LargeProgram)>,
    ) {
        match l {
            LargeProgram::Atomic(_) | LargeProgram::Test(_) => {}
            LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) => {
                for (i, c) in [(0, a), (1, b)] {
                    path.push(i);
                    go(c, path, left, right, out);
                    path.pop();
                }
            }
            LargeProgram::SeqTest(a1, x, a2) => {
                let lp = LargeProgram::seq(
                    LargeProgram::seq(left.prog.clone(), LargeProgram::Test(left.set.clone())),
                    (**a1).clone(),
                );
                let rp = LargeProgram::seq(
                    LargeProgram::seq((**a2).clone(), LargeProgram::Test(right.set.clone())),
                    right.prog.clone(),
                );
                path.push(1);
                out.insert(path.clone(), (lp.clone(), rp.clone()));
                path.pop();
                let mid_right = Side { set: x, prog: rp };
                let mid_left = Side { set: x, prog: lp };
                path.push(0);
                go(a1, path, left, &mid_right, out);
                path.pop();
                path.push(2);
                go(a2, path, &mid_left, right, out);
                path.pop();
            }
        }
    }
    let top = Side { set: phi, prog: skip() };
    let top_r = Side { set: phi, prog: skip() };
    let mut out = BTreeMap::new();
    go(&l.body, &mut Vec::new(), &top, &top_r, &mut out);
    out
}
