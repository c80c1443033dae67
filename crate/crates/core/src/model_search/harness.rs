//! Soundness harness. Scheme instances, rule conclusions and mutants are
//! compiled into one shared sliced program and checked on every structure
//! in the budget in a single sweep.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::engine::{
    decode, inclusion_violations, some_world_fails, Compiled, Compiler, Frame, Symbols, Val,
};
use super::pool::InstancePool;
use super::search::{check_budget, random_structure, Layout, SearchBudget, SearchMode};
use super::SearchError;
use crate::calculus::{rule_c_judgement, schemes, Binding, Instance, Occurrences, Scheme, SchemeBody};
use crate::normal_form::normalize;
use crate::semantics::{formula_set, relation, KripkeStructure, World};
use crate::syntax::{psub, usub, Formula, Judgement, JudgementKind, Program};

/// Deliberately unsound variants of the axiom schemes.
pub const MUTANTS: &[(&str, &str)] = &[
    ("T1/or", "<alpha & p?>q <-> <alpha^>(p | q)"),
    ("Dl/drop-negation", "<alpha>p <-> ~[alpha]p"),
    (";/swap", "[alpha;beta]p <-> [beta][alpha]p"),
    ("D/and", "<alpha + beta>p <-> <alpha>p & <beta>p"),
    ("K/converse", "([alpha]p -> [alpha]q) -> [alpha](p -> q)"),
    ("C1/no-loops", "<alpha>p & <beta>q -> <alpha;beta>(p & q)"),
    ("C3/no-loops", "<alpha>p & [alpha]q -> p & q"),
    ("V/and", "<alpha;(p | q)?;beta>r <-> <alpha;p?;beta>r & <alpha;q?;beta>r"),
    ("Wk/converse", "alpha => alpha & beta"),
    ("D3/inter", "(alpha & beta);gamma <=> alpha;gamma & beta;gamma"),
    ("D4/inter", "alpha;(beta & gamma) <=> alpha;beta & alpha;gamma"),
    ("T/box", "alpha & p? <=> ([alpha^]p)?"),
    ("T2/drop-test", "(alpha;p?) & beta <=> alpha & beta"),
    ("A/union", "alpha & (beta + gamma) <=> (alpha & beta) + gamma"),
    ("Ct/seq", "alpha;alpha <=> alpha"),
];

pub const RULES: [&str; 4] = ["MP", "Gen", "USub", "PSub"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Axiom,
    Rule,
    Mutant,
}

impl EntryKind {
    pub fn name(self) -> &'static str {
        match self {
            EntryKind::Axiom => "axiom",
            EntryKind::Rule => "rule",
            EntryKind::Mutant => "mutant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessOptions {
    /// Instances per axiom scheme.
    pub instances: usize,
    /// Sampled premise sets per rule.
    pub rule_instances: usize,
    pub mutant_instances: usize,
    pub mutants: bool,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            instances: 500,
            rule_instances: 500,
            mutant_instances: 100,
            mutants: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseFailure {
    pub instance: String,
    pub structure: KripkeStructure,
    pub world: World,
    pub pair: Option<(World, World)>,
}

impl CaseFailure {
    pub fn to_json(&self) -> Value {
        let k = &self.structure;
        json!({
            "instance": self.instance,
            "world": k.world_name(self.world),
            "pair": self.pair.map(|(u, v)| [k.world_name(u), k.world_name(v)]),
            "structure": k.to_value(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryReport {
    pub name: String,
    pub kind: EntryKind,
    pub instances: usize,
    /// Instances whose premises all held (equal to `instances` for axioms).
    pub nonvacuous: usize,
    pub failures: usize,
    pub example: Option<CaseFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessReport {
    pub max_worlds: usize,
    pub seed: u64,
    pub structures: u64,
    pub entries: Vec<EntryReport>,
    pub warnings: Vec<String>,
}

impl HarnessReport {
    /// Axiom and rule entries with at least one failing instance.
    pub fn unsound(&self) -> Vec<&EntryReport> {
        self.entries
            .iter()
            .filter(|e| e.kind != EntryKind::Mutant && e.failures > 0)
            .collect()
    }

    /// `(caught, total)` over the mutants.
    pub fn mutants_caught(&self) -> (usize, usize) {
        let m: Vec<_> = self.entries.iter().filter(|e| e.kind == EntryKind::Mutant).collect();
        (m.iter().filter(|e| e.failures > 0).count(), m.len())
    }

    pub fn entry(&self, name: &str) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn to_json(&self) -> Value {
        let (caught, total) = self.mutants_caught();
        json!({
            "max_worlds": self.max_worlds,
            "seed": self.seed,
            "structures": self.structures,
            "sound": self.unsound().is_empty(),
            "mutants_caught": caught,
            "mutants": total,
            "warnings": self.warnings,
            "entries": self.entries.iter().map(|e| json!({
                "name": e.name,
                "kind": e.kind.name(),
                "instances": e.instances,
                "nonvacuous": e.nonvacuous,
                "failures": e.failures,
                "example": e.example.as_ref().map(CaseFailure::to_json),
            })).collect::<Vec<_>>(),
        })
    }
}

/// What one check asserts of a structure.
#[derive(Clone, Debug)]
enum Goal {
    Valid(Formula),
    Incl(Program, Program),
    Equal(Program, Program),
    /// `phi <-> psi` holds everywhere exactly when `phi?` and `psi?` agree.
    TestPair(Formula, Formula),
}

impl Goal {
    fn render(&self) -> String {
        match self {
            Goal::Valid(f) => f.to_string(),
            Goal::Incl(l, r) => Judgement::new(JudgementKind::Implies, l.clone(), r.clone()).to_string(),
            Goal::Equal(l, r) => Judgement::new(JudgementKind::Equiv, l.clone(), r.clone()).to_string(),
            Goal::TestPair(a, b) => format!("({}) <-> ({}?  <=> {}?)", Formula::iff(a.clone(), b.clone()), a, b),
        }
    }

    fn from_judgement(j: Judgement) -> Goal {
        match j.kind {
            JudgementKind::Implies => Goal::Incl(j.left, j.right),
            JudgementKind::Equiv => Goal::Equal(j.left, j.right),
        }
    }
}

struct Check {
    goal: Goal,
    roots: [usize; 3],
}

impl Check {
    fn fail_lanes(&self, buf: &[Val], n: usize) -> u64 {
        let incl = |l: usize, r: usize| inclusion_violations(buf[l].rl(), buf[r].rl(), n);
        let [a, b, c] = self.roots;
        match self.goal {
            Goal::Valid(_) => some_world_fails(buf[a].ws(), n),
            Goal::Incl(..) => incl(a, b),
            Goal::Equal(..) => incl(a, b) | incl(b, a),
            Goal::TestPair(..) => {
                let valid = !some_world_fails(buf[a].ws(), n);
                let equal = !(incl(b, c) | incl(c, b));
                valid ^ equal
            }
        }
    }

    /// Re-check on a concrete structure; `Some` locates the failure.
    fn locate(&self, k: &KripkeStructure) -> Result<Option<(World, Option<(World, World)>)>, SearchError> {
        let missing = |l: &Program, r: &Program| -> Result<Option<(World, World)>, SearchError> {
            let (rl, rr) = (relation(k, l)?, relation(k, r)?);
            Ok(rl.pairs().into_iter().find(|&(u, v)| !rr.contains(u, v)))
        };
        let all = k.all_worlds();
        Ok(match &self.goal {
            Goal::Valid(f) => {
                let set = formula_set(k, f)?;
                (set != all).then(|| ((!set & all).trailing_zeros() as World, None))
            }
            Goal::Incl(l, r) => missing(l, r)?.map(|p| (p.0, Some(p))),
            Goal::Equal(l, r) => match missing(l, r)? {
                Some(p) => Some((p.0, Some(p))),
                None => missing(r, l)?.map(|p| (p.0, Some(p))),
            },
            Goal::TestPair(a, b) => {
                let iff = formula_set(k, &Formula::iff(a.clone(), b.clone()))?;
                let same = formula_set(k, a)? == formula_set(k, b)?;
                ((iff == all) != same).then(|| ((!iff & all).trailing_zeros().min(k.size() as u32 - 1) as World, None))
            }
        })
    }
}

enum Case {
    Check(usize),
    Rule { premises: Vec<usize>, conclusion: usize },
}

struct Entry {
    name: String,
    kind: EntryKind,
    cases: Vec<Case>,
}

#[derive(Default)]
struct Plan {
    checks: Vec<Check>,
    entries: Vec<Entry>,
}

impl Plan {
    fn add(&mut self, c: &mut Compiler, goal: Goal) -> usize {
        let roots = match &goal {
            Goal::Valid(f) => [c.add_formula(f), 0, 0],
            Goal::Incl(l, r) | Goal::Equal(l, r) => [c.add_program(l), c.add_program(r), 0],
            Goal::TestPair(a, b) => [
                c.add_formula(&Formula::iff(a.clone(), b.clone())),
                c.add_program(&Program::test(a.clone())),
                c.add_program(&Program::test(b.clone())),
            ],
        };
        self.checks.push(Check { goal, roots });
        self.checks.len() - 1
    }
}

fn pick<'a, T, R: Rng>(rng: &mut R, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("pool is nonempty")
}

fn draw_binding<R: Rng>(s: &Scheme, pool: &InstancePool, rng: &mut R) -> Binding {
    let mut b = Binding::new();
    for v in &s.formula_vars {
        b = b.formula(v, pick(rng, &pool.formulas).clone());
    }
    for v in &s.program_vars {
        b = b.program(v, pick(rng, &pool.programs).clone());
    }
    b
}

/// Draw up to `count` distinct goals from `draw`, giving up after a fixed
/// number of attempts.
fn distinct<R: Rng>(count: usize, rng: &mut R, mut draw: impl FnMut(&mut R) -> Option<Goal>) -> Vec<Goal> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..count * 10 {
        if out.len() == count {
            break;
        }
        if let Some(g) = draw(rng) {
            if seen.insert(g.render()) {
                out.push(g);
            }
        }
    }
    out
}

fn pattern_goal(s: &Scheme, b: &Binding) -> Option<Goal> {
    match s.instantiate(b)? {
        Instance::Formula(f) => Some(Goal::Valid(f)),
        Instance::Judgement(j) => Some(Goal::from_judgement(j)),
        Instance::TestProgram(a, b) => Some(Goal::TestPair(a, b)),
    }
}

fn scheme_goals<R: Rng>(s: &Scheme, pool: &InstancePool, count: usize, rng: &mut R) -> Vec<Goal> {
    match s.body {
        SchemeBody::Formula(_) | SchemeBody::Judgement(_) => {
            distinct(count, rng, |rng| pattern_goal(s, &draw_binding(s, pool, rng)))
        }
        SchemeBody::TestProgram => distinct(count, rng, |rng| {
            let a = pick(rng, &pool.formulas).clone();
            // Half the pairs are equivalent so both sides of the biconditional get exercised.
            let b = match rng.gen_range(0..6) {
                0 => Formula::not(Formula::not(a.clone())),
                1 => Formula::and(a.clone(), Formula::True),
                2 => normalize(&a).0,
                _ => pick(rng, &pool.formulas).clone(),
            };
            Some(Goal::TestPair(a, b))
        }),
        SchemeBody::CycleTransfer => distinct(count, rng, |rng| {
            let b1 = if rng.gen_ratio(1, 3) {
                Program::skip()
            } else {
                pick(rng, &pool.programs).clone()
            };
            let (b2, b3) = (pick(rng, &pool.programs).clone(), pick(rng, &pool.programs).clone());
            let p = pick(rng, &pool.formulas).clone();
            let (pat, _) = crate::calculus::rule_c_pattern(&b1, &b2, &b3, &p);
            let g = pick(rng, &pool.programs).clone();
            let host = match rng.gen_range(0..6) {
                0 => pat,
                1 => Program::seq(pat, g),
                2 => Program::seq(g, pat),
                3 => Program::inter(pat, g),
                4 => Program::union(pat, g),
                _ => Program::seq(Program::test(Formula::diamond(pat, pick(rng, &pool.formulas).clone())), g),
            };
            let j = rule_c_judgement(&host, &b1, &b2, &b3, &p, Occurrences::All).ok()?;
            Some(Goal::from_judgement(j))
        }),
    }
}

/// A formula that is usually valid: an axiom instance or a tautology, with
/// the occasional arbitrary formula.
fn premise<R: Rng>(pool: &InstancePool, axioms: &[&Scheme], rng: &mut R) -> Formula {
    match rng.gen_range(0..4) {
        0 | 1 => loop {
            let s = *pick(rng, axioms);
            if let Some(Goal::Valid(f)) = pattern_goal(s, &draw_binding(s, pool, rng)) {
                break f;
            }
        },
        2 => {
            let (a, b) = (pick(rng, &pool.formulas).clone(), pick(rng, &pool.formulas).clone());
            Formula::implies(a.clone(), Formula::implies(b, a))
        }
        _ => pick(rng, &pool.formulas).clone(),
    }
}

/// Premise goals and conclusion goal of one sampled rule application.
fn rule_case<R: Rng>(rule: &str, pool: &InstancePool, axioms: &[&Scheme], rng: &mut R) -> Option<(Vec<Goal>, Goal)> {
    match rule {
        "MP" => {
            let a = premise(pool, axioms, rng);
            let b = match a.as_iff() {
                Some((x, y)) if rng.gen_bool(0.5) => Formula::implies(x.clone(), y.clone()),
                _ if rng.gen_bool(0.5) => Formula::or(a.clone(), pick(rng, &pool.formulas).clone()),
                _ => pick(rng, &pool.formulas).clone(),
            };
            let imp = Formula::implies(a.clone(), b.clone());
            Some((vec![Goal::Valid(a), Goal::Valid(imp)], Goal::Valid(b)))
        }
        "Gen" => {
            let a = premise(pool, axioms, rng);
            let g = Formula::boxed(pick(rng, &pool.programs).clone(), a.clone());
            Some((vec![Goal::Valid(a)], Goal::Valid(g)))
        }
        "USub" => {
            let props: Vec<&String> = pool.vocab.props.iter().collect();
            let p = *props.choose(rng)?;
            let a = premise(pool, axioms, rng);
            let c = usub(&a, pick(rng, &pool.formulas), p);
            Some((vec![Goal::Valid(a)], Goal::Valid(c)))
        }
        "PSub" => {
            let (l, r) = if rng.gen_bool(0.6) {
                let js: Vec<&&Scheme> = axioms.iter().filter(|s| matches!(s.body, SchemeBody::Judgement(_))).collect();
                let s = **js.choose(rng)?;
                match s.instantiate(&draw_binding(s, pool, rng))? {
                    Instance::Judgement(j) => (j.left, j.right),
                    _ => return None,
                }
            } else {
                (pick(rng, &pool.programs).clone(), pick(rng, &pool.programs).clone())
            };
            let x = pick(rng, &pool.formulas).clone();
            let d = Formula::diamond(l.clone(), x);
            let f = match rng.gen_range(0..3) {
                0 => Formula::implies(d.clone(), d),
                1 => Formula::boxed(pick(rng, &pool.programs).clone(), Formula::or(Formula::not(d.clone()), d)),
                _ => Formula::implies(Formula::and(d.clone(), pick(rng, &pool.formulas).clone()), d),
            };
            let c = psub(&f, &l, &r);
            Some((vec![Goal::Valid(f), Goal::Incl(l, r)], Goal::Valid(c)))
        }
        _ => None,
    }
}

fn build_plan(pool: &InstancePool, opts: &HarnessOptions, symbols: &Symbols) -> (Plan, Compiled) {
    let mut plan = Plan::default();
    let mut c = Compiler::new(symbols, &[], &[]);
    let all: Vec<&Scheme> = schemes().iter().collect();
    let axioms: Vec<&Scheme> = all
        .iter()
        .copied()
        .filter(|s| matches!(s.body, SchemeBody::Formula(_) | SchemeBody::Judgement(_)))
        .collect();
    let formula_axioms: Vec<&Scheme> = axioms.iter().copied().filter(|s| !s.is_program_axiom()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for s in &all {
        let goals = scheme_goals(s, pool, opts.instances, &mut rng);
        let cases = goals.into_iter().map(|g| Case::Check(plan.add(&mut c, g))).collect();
        plan.entries.push(Entry {
            name: s.name.to_string(),
            kind: EntryKind::Axiom,
            cases,
        });
    }
    for rule in RULES {
        let mut cases = Vec::new();
        let mut tries = 0;
        while cases.len() < opts.rule_instances && tries < opts.rule_instances * 4 {
            tries += 1;
            let pick_from = if rule == "PSub" { &axioms } else { &formula_axioms };
            if let Some((premises, conclusion)) = rule_case(rule, pool, pick_from, &mut rng) {
                let premises = premises.into_iter().map(|g| plan.add(&mut c, g)).collect();
                let conclusion = plan.add(&mut c, conclusion);
                cases.push(Case::Rule { premises, conclusion });
            }
        }
        plan.entries.push(Entry {
            name: rule.to_string(),
            kind: EntryKind::Rule,
            cases,
        });
    }
    if opts.mutants {
        for &(name, text) in MUTANTS {
            let s = Scheme::custom(name, text).expect("mutant parses");
            let goals = scheme_goals(&s, pool, opts.mutant_instances, &mut rng);
            let cases = goals.into_iter().map(|g| Case::Check(plan.add(&mut c, g))).collect();
            plan.entries.push(Entry {
                name: name.to_string(),
                kind: EntryKind::Mutant,
                cases,
            });
        }
    }
    (plan, c.finish())
}

/// First failing `(n, batch, lane)` per check, in enumeration order.
type Hits = Vec<Option<(usize, u64, u32)>>;

fn merge(mut a: Hits, b: Hits) -> Hits {
    for (x, y) in a.iter_mut().zip(b) {
        if let Some(y) = y {
            if x.is_none_or(|x| y < x) {
                *x = Some(y);
            }
        }
    }
    a
}

fn sweep_exhaustive(plan: &Plan, compiled: &Compiled, symbols: &Symbols, b: &SearchBudget) -> (Hits, u64) {
    const CHUNK: u64 = 1 << 8;
    let mut hits: Hits = vec![None; plan.checks.len()];
    let mut visited = 0u64;
    for n in 1..=b.max_worlds {
        let layout = Layout::new(symbols, n);
        let scan = |chunk: u64| -> (Hits, u64) {
            let mut local: Hits = vec![None; plan.checks.len()];
            let mut buf = Vec::new();
            let mut count = 0u64;
            let end = ((chunk + 1) * CHUNK).min(layout.batches);
            for batch in chunk * CHUNK..end {
                if layout.skip(symbols, batch) {
                    continue;
                }
                count += 1u64 << layout.lane_vars;
                let frame = Frame::new(symbols, n, layout.lane_vars, batch);
                compiled.run(&frame, &[], &[], &mut buf);
                for (i, check) in plan.checks.iter().enumerate() {
                    if local[i].is_some() {
                        continue;
                    }
                    let lanes = check.fail_lanes(&buf, n);
                    if lanes != 0 {
                        local[i] = Some((n, batch, lanes.trailing_zeros()));
                    }
                }
            }
            (local, count)
        };
        let chunks = layout.batches.div_ceil(CHUNK);
        let empty = || (vec![None; plan.checks.len()], 0u64);
        let join = |(h1, c1): (Hits, u64), (h2, c2): (Hits, u64)| (merge(h1, h2), c1 + c2);
        let (h, c) = if b.parallel && chunks > 1 {
            (0..chunks).into_par_iter().map(scan).reduce(empty, join)
        } else {
            (0..chunks).map(scan).fold(empty(), join)
        };
        hits = merge(hits, h);
        visited += c;
    }
    (hits, visited)
}

/// Run every axiom scheme, rule and (optionally) mutant over the pool and
/// check it on all structures the budget allows.
pub fn soundness_harness(
    pool: &InstancePool,
    opts: &HarnessOptions,
    b: &SearchBudget,
) -> Result<HarnessReport, SearchError> {
    let vocab = pool.vocab.union(&b.vocab);
    vocab.check_disjoint()?;
    let symbols = Symbols::from_vocabulary(&vocab);
    check_budget(&symbols, b)?;
    let mut warnings = Vec::new();
    let empty_pool = pool.is_empty();
    if empty_pool {
        warnings.push("empty instance pool: every scheme passes vacuously".to_string());
    }
    let (plan, compiled) = if empty_pool {
        let mut plan = Plan::default();
        for s in schemes() {
            plan.entries.push(Entry { name: s.name.into(), kind: EntryKind::Axiom, cases: vec![] });
        }
        for r in RULES {
            plan.entries.push(Entry { name: r.into(), kind: EntryKind::Rule, cases: vec![] });
        }
        (plan, Compiler::new(&symbols, &[], &[]).finish())
    } else {
        build_plan(pool, opts, &symbols)
    };

    let (hits, structures): (Vec<Option<KripkeStructure>>, u64) = match b.mode {
        SearchMode::Exhaustive => {
            let (hits, visited) = sweep_exhaustive(&plan, &compiled, &symbols, b);
            let decoded = hits
                .into_iter()
                .map(|h| {
                    h.map(|(n, batch, lane)| {
                        let layout = Layout::new(&symbols, n);
                        decode(&symbols, &b.vocab, n, layout.lane_vars, batch, lane)
                    })
                })
                .collect();
            (decoded, visited)
        }
        SearchMode::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut found: Vec<Option<KripkeStructure>> = vec![None; plan.checks.len()];
            for _ in 0..samples {
                let k = random_structure(&mut rng, &vocab, b.max_worlds);
                for (i, check) in plan.checks.iter().enumerate() {
                    if found[i].is_none() && check.locate(&k)?.is_some() {
                        found[i] = Some(k.clone());
                    }
                }
            }
            (found, samples)
        }
    };

    let failure = |i: usize| -> Result<Option<CaseFailure>, SearchError> {
        let Some(k) = &hits[i] else { return Ok(None) };
        let check = &plan.checks[i];
        let (world, pair) = check.locate(k)?.ok_or_else(|| {
            SearchError::Internal(format!("sliced check disagrees with direct evaluation on {}", check.goal.render()))
        })?;
        Ok(Some(CaseFailure {
            instance: check.goal.render(),
            structure: k.clone(),
            world,
            pair,
        }))
    };

    let mut entries = Vec::new();
    for e in &plan.entries {
        let mut report = EntryReport {
            name: e.name.clone(),
            kind: e.kind,
            instances: e.cases.len(),
            nonvacuous: 0,
            failures: 0,
            example: None,
        };
        for case in &e.cases {
            let failed = match case {
                Case::Check(i) => {
                    report.nonvacuous += 1;
                    hits[*i].is_some().then_some(*i)
                }
                Case::Rule { premises, conclusion } => {
                    if premises.iter().all(|&p| hits[p].is_none()) {
                        report.nonvacuous += 1;
                        hits[*conclusion].is_some().then_some(*conclusion)
                    } else {
                        None
                    }
                }
            };
            if let Some(i) = failed {
                report.failures += 1;
                if report.example.is_none() {
                    report.example = failure(i)?;
                }
            }
        }
        if e.kind == EntryKind::Rule && report.nonvacuous == 0 && !empty_pool {
            warnings.push(format!("rule {} had no sampled instance with valid premises", e.name));
        }
        entries.push(report);
    }
    Ok(HarnessReport {
        max_worlds: b.max_worlds,
        seed: opts.seed,
        structures,
        entries,
        warnings,
    })
}
