use std::collections::BTreeMap;

use super::instances::{canonical_formula, canonical_set, contains, enumerate_instances, is_instance};
use super::labels::{left_right_sets, loop_left_right_programs, Occurrence};
use super::{LabelledTransition, LargeLoop, LargeProgram, TestSet};
use crate::syntax::{Formula, Program};

/// `[β']¬ψ ∉ l(β)` for every occurrence `β`, instance `β'` and `ψ ∈ r(β)`.
/// Members of `l(β)` are matched against the shape `[γ]¬ψ` and `γ` is
/// tested for being an instance, so no instances are enumerated. Test sets
/// are not checked for consistency.
pub fn is_consistent_transition(t: &LabelledTransition) -> bool {
    left_right_sets(t).iter().all(|(path, (left, right))| {
        let beta = t.program.subprogram(path).expect("occurrence from the labelling");
        !left.iter().any(|m| match m.as_box() {
            Some((gamma, Formula::Not(psi))) => contains(right, psi) && is_instance(gamma, beta),
            _ => false,
        })
    })
}

fn join(fs: &[&Program]) -> Program {
    Program::seq_all(fs.iter().map(|p| (*p).clone()))
}

/// Members of test sets of the form `[(β₁;φ?;β₂)^]⊥` with `β₁` an instance
/// of `rp(X)`, `β₂` an instance of `lp(X)` and `φ ∈ phi`.
pub fn forbidden_loop_members(l: &LargeLoop, phi: &TestSet) -> Vec<(Occurrence, Formula)> {
    let mut out = Vec::new();
    for (path, (lp, rp)) in loop_left_right_programs(l, phi) {
        let mut test_path = path.clone();
        test_path.pop();
        let Some(LargeProgram::SeqTest(_, x, _)) = l.body.subprogram(&test_path) else {
            unreachable!("test occurrence of a SeqTest");
        };
        for m in x {
            let Some((gamma, body)) = m.as_box() else { continue };
            let Some(inner) = gamma.as_loop().filter(|_| body.is_bot()) else { continue };
            let fs = inner.seq_factors();
            let hit = (1..fs.len().saturating_sub(1)).any(|k| {
                matches!(fs[k], Program::Test(f) if contains(phi, f))
                    && is_instance(&join(&fs[..k]), &rp)
                    && is_instance(&join(&fs[k + 1..]), &lp)
            });
            if hit {
                out.push((path.clone(), m.clone()));
            }
        }
    }
    out
}

/// Consistency of `Φ →body→ Φ` plus the loop condition on test sets.
pub fn is_consistent_loop(l: &LargeLoop, phi: &TestSet) -> bool {
    let t = LabelledTransition {
        left: phi.clone(),
        program: l.body.clone(),
        right: phi.clone(),
    };
    is_consistent_transition(&t) && forbidden_loop_members(l, phi).is_empty()
}

/// For each test occurrence `β = β₁;X?;β₂`, the formulae
/// `{φ | [β₁']φ ∈ l(β)} ∪ {⟨β₂'⟩ψ | ψ ∈ r(β)}` (over instances `β₁'`, `β₂'`)
/// missing from `X`. Keys are the test-set occurrences.
pub fn saturation_gap(t: &LabelledTransition) -> BTreeMap<Occurrence, TestSet> {
    let mut out = BTreeMap::new();
    for (path, (left, right)) in left_right_sets(t) {
        let Some(LargeProgram::SeqTest(b1, x, b2)) = t.program.subprogram(&path) else { continue };
        let mut demanded = TestSet::new();
        for m in &left {
            if let Some((gamma, f)) = m.as_box() {
                if is_instance(gamma, b1) {
                    demanded.insert(f.clone());
                }
            }
        }
        for inst in enumerate_instances(b2) {
            for psi in &right {
                demanded.insert(Formula::diamond(inst.clone(), psi.clone()));
            }
        }
        let have = canonical_set(x);
        let missing = demanded.into_iter().filter(|f| !have.contains(&canonical_formula(f))).collect();
        let mut key = path;
        key.push(1);
        out.insert(key, missing);
    }
    out
}

/// `saturation_gap` of `Φ →body→ Φ`, plus for each test `X` the loop
/// formulae `⟨(β₁;φ?;β₂)^⟩⊤` with `β₁` an instance of `rp(X)`, `β₂` of
/// `lp(X)` and `φ ∈ phi`. The order `rp` then `lp` is the one the loop
/// consistency condition uses: from `X` to the end of the body, then from
/// its start back to `X`.
pub fn loop_saturation_gap(l: &LargeLoop, phi: &TestSet) -> BTreeMap<Occurrence, TestSet> {
    let t = LabelledTransition {
        left: phi.clone(),
        program: l.body.clone(),
        right: phi.clone(),
    };
    let mut out = saturation_gap(&t);
    for (path, (lp, rp)) in loop_left_right_programs(l, phi) {
        let mut test_path = path.clone();
        test_path.pop();
        let Some(LargeProgram::SeqTest(_, x, _)) = l.body.subprogram(&test_path) else {
            unreachable!("test occurrence of a SeqTest");
        };
        let have = canonical_set(x);
        let entry = out.entry(path).or_default();
        for b1 in enumerate_instances(&rp) {
            for b2 in enumerate_instances(&lp) {
                for f in phi {
                    let test = Program::test(f.clone());
                    let fs: Vec<&Program> = b1.seq_factors().into_iter().chain([&test]).chain(b2.seq_factors()).collect();
                    let cyc = Formula::diamond(Program::loop_of(join(&fs)), Formula::True);
                    if !have.contains(&canonical_formula(&cyc)) {
                        entry.insert(cyc);
                    }
                }
            }
        }
    }
    out
}
