//! Executable examples: the split theory, the world without successors,
//! and the cyclic-test formula together with its shipped refutation.

use std::collections::BTreeSet;

use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::{
    check_proof, closure_domain, closure_violations, proof_from_json, schemes, world_theory, Binding,
    Justification, Proof, ProofError, Statement, StructKind,
};
use crate::model_search::{
    find_model, soundness_harness, HarnessOptions, InstancePool, SearchBudget, SearchError, SearchOutcome,
};
use crate::semantics::{eval, KripkeStructure, SemanticsError, World};
use crate::syntax::{parse, Formula, Judgement, Program, Vocabulary};

pub const SPLIT_FORMULA: &str = "<a>true & <b>true & [a & b]false";
pub const CYCLIC_FORMULA: &str = "<(a;[(b;a)^]false?;b)^>true";
pub const CYCLIC_REFUTATION: &str = include_str!("../fixtures/cyclic_refutation.json");

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone)]
pub struct FixtureOptions {
    pub cyclic_worlds: usize,
    pub harness_worlds: usize,
    pub harness_depth: usize,
    pub harness_pool: usize,
    pub harness: HarnessOptions,
    pub parallel: bool,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions {
            cyclic_worlds: 4,
            harness_worlds: 2,
            harness_depth: 1,
            harness_pool: 60,
            harness: HarnessOptions {
                instances: 60,
                rule_instances: 60,
                mutant_instances: 30,
                mutants: false,
                seed: 0,
            },
            parallel: true,
        }
    }
}

fn f(s: &str) -> Formula {
    parse(s).expect("fixture formula")
}

/// `{⟨a⟩⊤, ⟨b⟩⊤, [a∩b]⊥} ∪ {[a]φ, [b]φ | φ ∈ phi}`.
pub fn split(phi: &[Formula]) -> Vec<Formula> {
    let mut out = vec![f("<a>true"), f("<b>true"), f("[a & b]false")];
    for x in phi {
        out.push(Formula::boxed(Program::atomic("a"), x.clone()));
        out.push(Formula::boxed(Program::atomic("b"), x.clone()));
    }
    out
}

/// Axiomatises the world without successors over the programs `a`, `b` and
/// no propositions.
pub fn dead_end_theory() -> Vec<Formula> {
    vec![f("[a]false"), f("[b]false")]
}

fn budget(n: usize, parallel: bool) -> SearchBudget {
    let b = SearchBudget::exhaustive(n);
    if parallel {
        b
    } else {
        b.serial()
    }
}

/// Smallest model size of `g` up to `max`, with the model.
pub fn minimal_model(g: &Formula, max: usize, parallel: bool) -> Result<Option<(KripkeStructure, World)>, SearchError> {
    match find_model(g, &budget(max, parallel))? {
        SearchOutcome::ModelFound { structure, world } => Ok(Some((structure, world))),
        _ => Ok(None),
    }
}

/// `Split(Φ₀)` for the dead-end theory needs exactly three worlds.
pub fn split_fixture(parallel: bool) -> Result<FixtureResult, FixtureError> {
    let g = Formula::conj(split(&dead_end_theory()));
    let found = minimal_model(&g, 3, parallel)?;
    let size = found.as_ref().map(|(k, _)| k.size());
    Ok(FixtureResult {
        name: "split",
        passed: size == Some(3),
        detail: json!({
            "formula": g.to_string(),
            "minimal_worlds": size,
            "model": found.map(|(k, w)| json!({"world": k.world_name(w), "structure": k.to_value()})),
        }),
    })
}

/// Identify worlds whose theories over `domain` coincide.
pub fn merge_equal_theories(k: &KripkeStructure, domain: &BTreeSet<Formula>) -> Result<(KripkeStructure, Vec<usize>), SemanticsError> {
    let theories: Vec<_> = (0..k.size()).map(|w| world_theory(k, w, domain)).collect::<Result<_, _>>()?;
    let mut class = vec![0; k.size()];
    let mut reps: Vec<usize> = Vec::new();
    for w in 0..k.size() {
        match reps.iter().position(|&r| theories[r] == theories[w]) {
            Some(c) => class[w] = c,
            None => {
                class[w] = reps.len();
                reps.push(w);
            }
        }
    }
    let mut q = KripkeStructure::with_size(reps.len(), &k.vocabulary())?;
    for (p, set) in k.props() {
        for (c, &r) in reps.iter().enumerate() {
            if set >> r & 1 == 1 {
                q.set_true(p, c)?;
            }
        }
    }
    for (a, rel) in k.programs() {
        for (u, v) in rel.pairs() {
            q.add_edge(a, class[u], class[v])?;
        }
    }
    Ok((q, class))
}

/// The dead-end world's theory satisfies the closure properties of a
/// maximally consistent set, and in the smallest model of `Split(Φ₀)` the
/// two successors share it, so merging worlds by theory breaks `[a∩b]⊥`.
pub fn dead_end_fixture(parallel: bool) -> Result<FixtureResult, FixtureError> {
    let phi0 = dead_end_theory();
    let parts = split(&phi0);
    let domain = closure_domain(parts.iter().chain(&phi0));
    let vocab = Vocabulary::new(Vec::<String>::new(), ["a", "b"]).expect("vocabulary");
    let lone = KripkeStructure::with_size(1, &vocab)?;
    let theory = world_theory(&lone, 0, &domain)?;
    let violations = closure_violations(&theory, &domain);
    let contains_phi0 = phi0.iter().all(|x| theory.formulas.contains(x));

    let g = Formula::conj(parts);
    let Some((k, root)) = minimal_model(&g, 3, parallel)? else {
        return Ok(FixtureResult {
            name: "dead-end",
            passed: false,
            detail: json!({"error": "no model of the split theory within 3 worlds"}),
        });
    };
    let succ: Vec<usize> = (0..k.size()).filter(|&w| w != root).collect();
    let shared = succ
        .iter()
        .map(|&w| world_theory(&k, w, &domain))
        .collect::<Result<Vec<_>, _>>()?
        .windows(2)
        .all(|p| p[0] == p[1] && p[0] == theory);
    let (merged, class) = merge_equal_theories(&k, &domain)?;
    let survives = eval(&merged, class[root], &g)?;
    Ok(FixtureResult {
        name: "dead-end",
        passed: violations.is_empty() && contains_phi0 && shared && !survives,
        detail: json!({
            "theory_size": theory.formulas.len(),
            "closure_violations": violations.iter().map(|v| format!("{}: {}", v.property, v.formula)).collect::<Vec<_>>(),
            "successors_share_theory": shared,
            "merged_worlds": merged.size(),
            "split_holds_after_merge": survives,
        }),
    })
}

pub fn cyclic_refutation() -> Result<Proof, ProofError> {
    proof_from_json(CYCLIC_REFUTATION)
}

/// One line of a proof changed in one way.
#[derive(Debug, Clone)]
pub struct Corruption {
    pub line: usize,
    pub kind: String,
    pub proof: Proof,
}

fn flipped(s: &Statement) -> Statement {
    match s {
        Statement::Formula(x) => Statement::Formula(Formula::not(x.clone())),
        Statement::Judgement(j) if j.left != j.right => {
            Statement::Judgement(Judgement::new(j.kind, j.right.clone(), j.left.clone()))
        }
        Statement::Judgement(j) => Statement::Judgement(Judgement::new(j.kind, j.left.clone(), Program::skip())),
    }
}

fn other_ref(r: usize, line: usize, taken: &[usize]) -> Option<usize> {
    (1..line).rev().chain(line + 1..line + 2).find(|&x| x != r && !taken.contains(&x))
}

fn with_refs(j: &Justification, refs: &[usize]) -> Justification {
    match j {
        Justification::MP(..) => Justification::MP(refs[0], refs[1]),
        Justification::Gen { program, .. } => Justification::Gen {
            line: refs[0],
            program: program.clone(),
        },
        Justification::USub { prop, formula, .. } => Justification::USub {
            line: refs[0],
            prop: prop.clone(),
            formula: formula.clone(),
        },
        Justification::PSub { .. } => Justification::PSub {
            line: refs[0],
            judgement: refs[1],
        },
        Justification::TestProgram(_) => Justification::TestProgram(refs[0]),
        Justification::Struct { kind, .. } => Justification::Struct {
            kind: *kind,
            refs: refs.to_vec(),
        },
        other => other.clone(),
    }
}

fn perturbed_bindings(b: &Binding) -> Vec<(String, Binding)> {
    let mut out = Vec::new();
    for (k, v) in &b.formulas {
        let mut c = b.clone();
        c.formulas.insert(k.clone(), if *v == Formula::bot() { Formula::True } else { Formula::bot() });
        out.push((format!("binding {k}"), c));
    }
    for (k, v) in &b.programs {
        let mut c = b.clone();
        let alt = if *v == Program::skip() { Program::atomic("a") } else { Program::skip() };
        c.programs.insert(k.clone(), alt);
        out.push((format!("binding {k}"), c));
    }
    out
}

fn other_scheme(name: &str, program: bool) -> String {
    let names: Vec<&str> = schemes()
        .iter()
        .filter(|s| s.is_program_axiom() == program)
        .map(|s| s.name)
        .collect();
    let i = names.iter().position(|n| *n == name).unwrap_or(0);
    names[(i + 1) % names.len()].to_string()
}

fn justification_corruptions(j: &Justification, line: usize) -> Vec<(String, Justification)> {
    let mut out = Vec::new();
    let refs = j.refs();
    for (i, &r) in refs.iter().enumerate() {
        if let Some(x) = other_ref(r, line, &refs) {
            let mut rs = refs.clone();
            rs[i] = x;
            out.push((format!("ref {r} -> {x}"), with_refs(j, &rs)));
        }
    }
    match j {
        Justification::Taut { .. } => out.push((
            "taut -> axiom".into(),
            Justification::AxiomFormula {
                name: "K".into(),
                binding: None,
            },
        )),
        Justification::AxiomFormula { name, binding } => {
            out.push((
                "scheme renamed".into(),
                Justification::AxiomFormula {
                    name: other_scheme(name, false),
                    binding: binding.clone(),
                },
            ));
            for (k, b) in binding.iter().flat_map(perturbed_bindings) {
                out.push((k, Justification::AxiomFormula { name: name.clone(), binding: Some(b) }));
            }
        }
        Justification::AxiomProgram { name, binding, occurrences } => {
            out.push((
                "scheme renamed".into(),
                Justification::AxiomProgram {
                    name: other_scheme(name, true),
                    binding: binding.clone(),
                    occurrences: *occurrences,
                },
            ));
            for (k, b) in binding.iter().flat_map(perturbed_bindings) {
                out.push((
                    k,
                    Justification::AxiomProgram {
                        name: name.clone(),
                        binding: Some(b),
                        occurrences: *occurrences,
                    },
                ));
            }
        }
        Justification::Gen { line, program: Some(p) } => out.push((
            "gen program".into(),
            Justification::Gen {
                line: *line,
                program: Some(if *p == Program::atomic("a") { Program::atomic("b") } else { Program::atomic("a") }),
            },
        )),
        Justification::Struct { kind, refs } => {
            let next = StructKind::ALL[(StructKind::ALL.iter().position(|k| k == kind).unwrap_or(0) + 1) % StructKind::ALL.len()];
            out.push((
                "struct kind".into(),
                Justification::Struct {
                    kind: next,
                    refs: refs.clone(),
                },
            ));
        }
        _ => {}
    }
    out
}

/// Statement flips (negation, or swapped judgement sides), retargeted
/// references, renamed schemes and perturbed bindings, one line at a time.
pub fn line_corruptions(p: &Proof) -> Vec<Corruption> {
    let mut out = Vec::new();
    for (i, l) in p.lines.iter().enumerate() {
        let mut q = p.clone();
        q.lines[i].statement = flipped(&l.statement);
        out.push(Corruption {
            line: l.id,
            kind: "statement".into(),
            proof: q,
        });
        for (kind, j) in justification_corruptions(&l.justification, l.id) {
            let mut q = p.clone();
            q.lines[i].justification = j;
            out.push(Corruption { line: l.id, kind, proof: q });
        }
    }
    out
}

fn alternate_byte(c: u8) -> u8 {
    match c {
        b'a' => b'b',
        b'b' => b'a',
        b'0'..=b'8' => c + 1,
        b'9' => b'0',
        b'&' => b'|',
        b'|' => b'&',
        b'<' => b'[',
        b'[' => b'<',
        b'>' => b']',
        b']' => b'>',
        b'~' | b'?' | b'^' | b'(' | b')' => b' ',
        b';' => b'&',
        _ => b'x',
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteCorruptionReport {
    pub positions: usize,
    /// Variants that no longer load.
    pub rejected: usize,
    /// Variants that load to the same proof.
    pub unchanged: usize,
    /// Variants that load to a different proof that fails to check.
    pub failed: usize,
    /// Byte offsets of variants that load to a different proof that checks.
    pub survivors: Vec<usize>,
}

/// Replace each byte of the proof JSON by a fixed alternative and load and
/// check every variant.
pub fn byte_corruptions(text: &str) -> Result<ByteCorruptionReport, ProofError> {
    let original = proof_from_json(text)?;
    let bytes = text.as_bytes();
    let mut r = ByteCorruptionReport::default();
    for pos in 0..bytes.len() {
        if bytes[pos].is_ascii_whitespace() {
            continue;
        }
        r.positions += 1;
        let mut v = bytes.to_vec();
        v[pos] = alternate_byte(bytes[pos]);
        let Ok(s) = String::from_utf8(v) else {
            r.rejected += 1;
            continue;
        };
        match proof_from_json(&s) {
            Err(_) => r.rejected += 1,
            Ok(p) if p == original => r.unchanged += 1,
            Ok(p) if check_proof(&p).is_err() => r.failed += 1,
            Ok(_) => r.survivors.push(pos),
        }
    }
    Ok(r)
}

/// No model within `max_worlds`, the refutation checks and ends in the
/// negated formula, and every single-line corruption fails to check.
pub fn cyclic_fixture(max_worlds: usize, parallel: bool) -> Result<FixtureResult, FixtureError> {
    let g = f(CYCLIC_FORMULA);
    let outcome = find_model(&g, &budget(max_worlds, parallel))?;
    let proof = cyclic_refutation()?;
    let checks = check_proof(&proof);
    let concludes = proof.last_formula() == Some(&Formula::not(g.clone()));
    let corruptions = line_corruptions(&proof);
    let survivors: Vec<String> = corruptions
        .iter()
        .filter(|c| check_proof(&c.proof).is_ok())
        .map(|c| format!("line {}: {}", c.line, c.kind))
        .collect();
    Ok(FixtureResult {
        name: "cyclic",
        passed: outcome == SearchOutcome::NoModelUpTo(max_worlds) && checks.is_ok() && concludes && survivors.is_empty(),
        detail: json!({
            "formula": g.to_string(),
            "search": outcome.to_json(),
            "proof": checks.err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()),
            "concludes_negation": concludes,
            "corruptions": corruptions.len(),
            "surviving_corruptions": survivors,
        }),
    })
}

/// A small run of the soundness harness; passes when nothing is unsound.
pub fn harness_fixture(o: &FixtureOptions) -> Result<FixtureResult, FixtureError> {
    let vocab = Vocabulary::new(["p", "q"], ["a", "b"]).expect("vocabulary");
    let pool = InstancePool::random(&vocab, o.harness_depth, o.harness_pool, o.harness.seed);
    let report = soundness_harness(&pool, &o.harness, &budget(o.harness_worlds, o.parallel))?;
    let unsound: Vec<&str> = report.unsound().iter().map(|e| e.name.as_str()).collect();
    Ok(FixtureResult {
        name: "harness",
        passed: unsound.is_empty(),
        detail: json!({"unsound": unsound, "report": report.to_json()}),
    })
}

pub fn run_fixtures(o: &FixtureOptions) -> Result<Vec<FixtureResult>, FixtureError> {
    Ok(vec![
        split_fixture(o.parallel)?,
        dead_end_fixture(o.parallel)?,
        cyclic_fixture(o.cyclic_worlds, o.parallel)?,
        harness_fixture(o)?,
    ])
}
