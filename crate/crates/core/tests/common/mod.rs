//! Oracles for the integration tests. Everything here is computed from the
//! raw structure accessors and the syntax trees, without going through the
//! library's evaluator, instance enumerator or labelling code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pdlkit::large_programs::{LabelledTransition, LargeProgram, TestSet};
use pdlkit::semantics::{bits, KripkeStructure, World};
use pdlkit::{Formula, Program, Vocabulary};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Pairs = BTreeSet<(World, World)>;

pub fn vocab(props: &[&str], programs: &[&str]) -> Vocabulary {
    Vocabulary::new(props.iter().copied(), programs.iter().copied()).unwrap()
}

pub fn naive_pairs(k: &KripkeStructure, p: &Program) -> Pairs {
    let n = k.size();
    match p {
        Program::Atomic(a) => k.edges(a).map(|r| r.pairs().into_iter().collect()).unwrap_or_default(),
        Program::Test(f) => (0..n).filter(|&w| naive_holds(k, w, f)).map(|w| (w, w)).collect(),
        Program::Union(a, b) => naive_pairs(k, a).union(&naive_pairs(k, b)).copied().collect(),
        Program::Inter(a, b) => naive_pairs(k, a).intersection(&naive_pairs(k, b)).copied().collect(),
        Program::Seq(a, b) => {
            let (x, y) = (naive_pairs(k, a), naive_pairs(k, b));
            let mut out = Pairs::new();
            for &(u, m) in &x {
                for &(m2, v) in &y {
                    if m == m2 {
                        out.insert((u, v));
                    }
                }
            }
            out
        }
    }
}

pub fn naive_holds(k: &KripkeStructure, w: World, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::Prop(p) => k.valuation(p).map(|s| s >> w & 1 == 1).unwrap_or(false),
        Formula::Not(g) => !naive_holds(k, w, g),
        Formula::Or(a, b) => naive_holds(k, w, a) || naive_holds(k, w, b),
        Formula::Diamond(p, g) => naive_pairs(k, p).iter().any(|&(u, v)| u == w && naive_holds(k, v, g)),
    }
}

/// Every structure with exactly `n` worlds over `v`.
pub fn structures(v: &Vocabulary, n: usize) -> impl Iterator<Item = KripkeStructure> + '_ {
    let props: Vec<&String> = v.props.iter().collect();
    let progs: Vec<&String> = v.programs.iter().collect();
    let width = props.len() * n + progs.len() * n * n;
    (0u64..1 << width).map(move |code| {
        let mut k = KripkeStructure::with_size(n, v).unwrap();
        let mut bit = 0;
        for p in &props {
            for w in 0..n {
                if code >> bit & 1 == 1 {
                    k.set_true(p, w).unwrap();
                }
                bit += 1;
            }
        }
        for a in &progs {
            for u in 0..n {
                for x in 0..n {
                    if code >> bit & 1 == 1 {
                        k.add_edge(a, u, x).unwrap();
                    }
                    bit += 1;
                }
            }
        }
        k
    })
}

pub fn structures_up_to(v: &Vocabulary, max: usize) -> impl Iterator<Item = KripkeStructure> + '_ {
    (1..=max).flat_map(move |n| structures(v, n))
}

/// `k` with `p` re-interpreted as `set`.
pub fn with_valuation(k: &KripkeStructure, p: &str, set: u64) -> KripkeStructure {
    let mut v = k.vocabulary();
    v.props.insert(p.to_string());
    let mut out = KripkeStructure::with_size(k.size(), &v).unwrap();
    for (q, s) in k.props() {
        for w in bits(s) {
            out.set_true(q, w).unwrap();
        }
    }
    out.set_valuation(p, set).unwrap();
    for (a, r) in k.programs() {
        for (u, x) in r.pairs() {
            out.add_edge(a, u, x).unwrap();
        }
    }
    out
}

// Keys that identify programs and formulae up to associativity of `;`.

pub fn program_tokens(p: &Program) -> Vec<String> {
    match p {
        Program::Atomic(a) => vec![a.clone()],
        Program::Seq(a, b) => {
            let mut t = program_tokens(a);
            t.extend(program_tokens(b));
            t
        }
        Program::Union(a, b) => vec![format!("({} + {})", program_key(a), program_key(b))],
        Program::Inter(a, b) => vec![format!("({} & {})", program_key(a), program_key(b))],
        Program::Test(f) => vec![format!("{{{}}}?", formula_key(f))],
    }
}

pub fn program_key(p: &Program) -> String {
    program_tokens(p).join(" ; ")
}

pub fn formula_key(f: &Formula) -> String {
    match f {
        Formula::True => "T".into(),
        Formula::Prop(p) => p.clone(),
        Formula::Not(g) => format!("~{}", formula_key(g)),
        Formula::Or(a, b) => format!("({} | {})", formula_key(a), formula_key(b)),
        Formula::Diamond(p, g) => format!("<{}>{}", program_key(p), formula_key(g)),
    }
}

/// Instances of a large program as token lists: an intersection is one
/// token, a test is one token, `;` concatenates.
pub fn instance_tokens(l: &LargeProgram) -> BTreeSet<Vec<String>> {
    let tests = |x: &TestSet| -> Vec<String> { x.iter().map(|f| format!("{{{}}}?", formula_key(f))).collect() };
    match l {
        LargeProgram::Atomic(a) => BTreeSet::from([vec![a.clone()]]),
        LargeProgram::Test(x) => tests(x).into_iter().map(|t| vec![t]).collect(),
        LargeProgram::Inter(a, b) => {
            let (xs, ys) = (instance_tokens(a), instance_tokens(b));
            let mut out = BTreeSet::new();
            for x in &xs {
                for y in &ys {
                    out.insert(vec![format!("({} & {})", x.join(" ; "), y.join(" ; "))]);
                }
            }
            out
        }
        LargeProgram::Seq(a, b) => {
            let (xs, ys) = (instance_tokens(a), instance_tokens(b));
            let mut out = BTreeSet::new();
            for x in &xs {
                for y in &ys {
                    out.insert([x.clone(), y.clone()].concat());
                }
            }
            out
        }
        LargeProgram::SeqTest(a, x, b) => {
            let (xs, ys) = (instance_tokens(a), instance_tokens(b));
            let mut out = BTreeSet::new();
            for p in &xs {
                for t in tests(x) {
                    for q in &ys {
                        out.insert([p.clone(), vec![t.clone()], q.clone()].concat());
                    }
                }
            }
            out
        }
    }
}

pub fn instance_keys(l: &LargeProgram) -> BTreeSet<String> {
    instance_tokens(l).into_iter().map(|t| t.join(" ; ")).collect()
}

pub fn oracle_leq(l1: &LargeProgram, l2: &LargeProgram) -> bool {
    instance_keys(l1).is_subset(&instance_keys(l2))
}

/// `(occurrence, left label, right label)` for every program occurrence.
pub fn labels(t: &LabelledTransition) -> Vec<(&LargeProgram, TestSet, TestSet)> {
    fn go<'a>(l: &'a LargeProgram, left: &TestSet, right: &TestSet, out: &mut Vec<(&'a LargeProgram, TestSet, TestSet)>) {
        out.push((l, left.clone(), right.clone()));
        match l {
            LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) => {
                go(a, left, right, out);
                go(b, left, right, out);
            }
            LargeProgram::SeqTest(a, x, b) => {
                go(a, left, x, out);
                go(b, x, right, out);
            }
            LargeProgram::Atomic(_) | LargeProgram::Test(_) => {}
        }
    }
    let mut out = Vec::new();
    go(&t.program, &t.left, &t.right, &mut out);
    out
}

/// Inconsistent iff some occurrence `β`, instance `β'` and `ψ ∈ r(β)` have
/// `[β']¬ψ ∈ l(β)`, compared by key.
pub fn oracle_consistent(t: &LabelledTransition) -> bool {
    for (beta, left, right) in labels(t) {
        let members: BTreeSet<String> = left.iter().map(formula_key).collect();
        for inst in instance_keys(beta) {
            for psi in &right {
                // [γ]¬ψ is ¬⟨γ⟩¬¬ψ
                let key = format!("~<{inst}>~~{}", formula_key(psi));
                if members.contains(&key) {
                    return false;
                }
            }
        }
    }
    true
}

// Generators.

pub fn formula_pool() -> Vec<Formula> {
    ["p", "q", "~q", "<a>p", "[b]q", "<a;b>true"]
        .iter()
        .map(|s| pdlkit::syntax::parse(s).unwrap())
        .collect()
}

pub fn random_test_set<R: Rng>(rng: &mut R, pool: &[Formula]) -> TestSet {
    let size = rng.gen_range(1..=3);
    pool.choose_multiple(rng, size).cloned().collect()
}

pub fn random_large<R: Rng>(rng: &mut R, pool: &[Formula], depth: usize) -> LargeProgram {
    if depth == 0 || rng.gen_ratio(1, 3) {
        return LargeProgram::atomic(if rng.gen() { "a" } else { "b" });
    }
    if rng.gen_ratio(1, 3) {
        LargeProgram::inter(random_large(rng, pool, depth - 1), random_large(rng, pool, depth - 1))
    } else {
        LargeProgram::seq_test(
            random_large(rng, pool, depth - 1),
            random_test_set(rng, pool),
            random_large(rng, pool, depth - 1),
        )
    }
}

/// A program whose `;`-chain is `items`, associated at random.
pub fn random_association<R: Rng>(rng: &mut R, items: &[Program]) -> Program {
    if items.len() == 1 {
        return items[0].clone();
    }
    let k = rng.gen_range(1..items.len());
    Program::seq(random_association(rng, &items[..k]), random_association(rng, &items[k..]))
}

/// One random instance of `l` as a program, with random association.
pub fn random_instance<R: Rng>(rng: &mut R, l: &LargeProgram) -> Program {
    fn chain<R: Rng>(rng: &mut R, l: &LargeProgram, out: &mut Vec<Program>) {
        match l {
            LargeProgram::Atomic(a) => out.push(Program::atomic(a.clone())),
            LargeProgram::Inter(a, b) => out.push(Program::inter(random_instance(rng, a), random_instance(rng, b))),
            LargeProgram::Test(x) => out.push(Program::test(x.iter().collect::<Vec<_>>().choose(rng).map(|f| (*f).clone()).unwrap())),
            LargeProgram::Seq(a, b) => {
                chain(rng, a, out);
                chain(rng, b, out);
            }
            LargeProgram::SeqTest(a, x, b) => {
                chain(rng, a, out);
                out.push(Program::test(x.iter().collect::<Vec<_>>().choose(rng).map(|f| (*f).clone()).unwrap()));
                chain(rng, b, out);
            }
        }
    }
    let mut items = Vec::new();
    chain(rng, l, &mut items);
    random_association(rng, &items)
}

fn occurrences(l: &LargeProgram) -> Vec<&LargeProgram> {
    let mut out = vec![l];
    match l {
        LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) | LargeProgram::SeqTest(a, _, b) => {
            out.extend(occurrences(a));
            out.extend(occurrences(b));
        }
        _ => {}
    }
    out
}

/// Random transition whose left set often holds boxes over instances of
/// its subprograms, so both outcomes occur.
pub fn random_transition<R: Rng>(rng: &mut R) -> LabelledTransition {
    let pool = formula_pool();
    let program = random_large(rng, &pool, 3);
    let mut left = random_test_set(rng, &pool);
    let mut right = random_test_set(rng, &pool);
    let occ = occurrences(&program);
    for _ in 0..rng.gen_range(0..3) {
        let beta = occ.choose(rng).unwrap();
        let psi = pool.choose(rng).unwrap().clone();
        left.insert(Formula::boxed(random_instance(rng, beta), Formula::not(psi.clone())));
        if rng.gen_ratio(1, 2) {
            right.insert(psi);
        }
    }
    // Plant boxes inside test sets as well.
    let program = plant(rng, &program, &pool);
    LabelledTransition { left, program, right }
}

fn plant<R: Rng>(rng: &mut R, l: &LargeProgram, pool: &[Formula]) -> LargeProgram {
    match l {
        LargeProgram::SeqTest(a, x, b) => {
            let mut x = x.clone();
            if rng.gen_ratio(1, 2) {
                let psi = pool.choose(rng).unwrap().clone();
                x.insert(Formula::boxed(random_instance(rng, b), Formula::not(psi)));
            }
            LargeProgram::SeqTest(Box::new(plant(rng, a, pool)), x, Box::new(plant(rng, b, pool)))
        }
        LargeProgram::Inter(a, b) => LargeProgram::inter(plant(rng, a, pool), plant(rng, b, pool)),
        _ => l.clone(),
    }
}

/// Every grammatical large program over atoms `a`, `b` with at most three
/// leaves and two test positions, test sets drawn from the nonempty subsets
/// of `{p, q, r}`.
pub fn leq_universe() -> Vec<LargeProgram> {
    let props = ["p", "q", "r"];
    let sets: Vec<TestSet> = (1u32..8)
        .map(|m| (0..3).filter(|i| m >> i & 1 == 1).map(|i| Formula::prop(props[i])).collect())
        .collect();
    let mut by_leaves: BTreeMap<usize, Vec<LargeProgram>> = BTreeMap::new();
    by_leaves.insert(1, vec![LargeProgram::atomic("a"), LargeProgram::atomic("b")]);
    for n in 2..=3 {
        let mut out = Vec::new();
        for k in 1..n {
            let (ls, rs) = (by_leaves[&k].clone(), by_leaves[&(n - k)].clone());
            for l in &ls {
                for r in &rs {
                    out.push(LargeProgram::inter(l.clone(), r.clone()));
                    for x in &sets {
                        out.push(LargeProgram::SeqTest(Box::new(l.clone()), x.clone(), Box::new(r.clone())));
                    }
                }
            }
        }
        by_leaves.insert(n, out);
    }
    by_leaves
        .into_values()
        .flatten()
        .filter(|l| l.test_positions() <= 2)
        .collect()
}
