use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use pdlkit::calculus::{check_proof, proof_from_json};
use pdlkit::fixtures::{run_fixtures, FixtureOptions};
use pdlkit::large_programs::{
    enumerate_instances, forbidden_loop_members, is_consistent_loop, is_consistent_transition, leq, lift,
    loop_saturation_gap, saturation_gap, test_set_from_value, LabelledTransition, LargeLoop, LargeProgram,
    Occurrence, TestSet,
};
use pdlkit::model_search::{
    check_program_judgement, check_validity, find_model, minimize_countermodel, soundness_harness,
    EntryKind, HarnessOptions, InstancePool, SearchBudget, SearchMode, SearchOutcome,
};
use pdlkit::normal_form::{is_normal, normalize};
use pdlkit::semantics::{
    articulation_nodes, eval, formula_set, gateway_split, is_minimal_witness, relation, witness_graphs, bits,
    KripkeStructure, TransitionQuery, WitnessGraph, DEFAULT_CAP,
};
use pdlkit::syntax::{
    parse, parse_judgement, parse_program, render_program_with, render_with, JudgementKind, Program,
    RenderStyle, Vocabulary,
};

use crate::report::{usage, RunReport, Status};
use crate::{Command, Input, LargeCommand, SearchArgs};

/// Largest instance count `large instances` will enumerate.
const MAX_ENUMERATED: u128 = 1_000_000;

fn read_path(p: &Path) -> Result<String> {
    if p.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn read_input(i: &Input) -> Result<String> {
    match (&i.text, &i.file) {
        (Some(t), None) if t == "-" => read_path(Path::new("-")),
        (Some(t), None) => Ok(t.clone()),
        (None, Some(p)) => read_path(p),
        (None, None) => Err(usage("no input given: pass the text inline, --file PATH, or - for standard input")),
        (Some(_), Some(_)) => Err(usage("give the input inline or with --file, not both")),
    }
}

fn load_model(p: &Path) -> Result<KripkeStructure> {
    let text = read_path(p)?;
    KripkeStructure::from_json(&text).with_context(|| format!("loading {}", p.display()))
}

fn names(k: &KripkeStructure, set: u64) -> Vec<String> {
    bits(set).map(|w| k.world_name(w).to_string()).collect()
}

fn pair_names(k: &KripkeStructure, pairs: &[(usize, usize)]) -> Vec<[String; 2]> {
    pairs
        .iter()
        .map(|&(u, v)| [k.world_name(u).to_string(), k.world_name(v).to_string()])
        .collect()
}

fn graph_value(k: &KripkeStructure, g: &WitnessGraph) -> Value {
    json!({
        "nodes": g.nodes.iter().map(|&w| k.world_name(w)).collect::<Vec<_>>(),
        "edges": g.edges.iter().map(|e| json!([k.world_name(e.from), e.label, k.world_name(e.to)])).collect::<Vec<_>>(),
    })
}

fn graph_text(k: &KripkeStructure, g: &WitnessGraph) -> String {
    let edges: Vec<String> = g
        .edges
        .iter()
        .map(|e| format!("{} -{}-> {}", k.world_name(e.from), e.label, k.world_name(e.to)))
        .collect();
    if edges.is_empty() {
        format!("node {}", k.world_name(g.source))
    } else {
        edges.join(", ")
    }
}

fn budget(s: &SearchArgs, parallel: bool) -> (SearchBudget, Option<u64>) {
    let (mut b, seed) = match s.samples {
        Some(n) => {
            let seed = s.seed.unwrap_or_else(rand::random);
            (SearchBudget::random(s.max_worlds, n, seed), Some(seed))
        }
        None => (SearchBudget::exhaustive(s.max_worlds), None),
    };
    if !parallel {
        b = b.serial();
    }
    (b, seed)
}

fn bound_text(b: &SearchBudget) -> String {
    match b.mode {
        SearchMode::Exhaustive => format!("every structure with at most {} worlds", b.max_worlds),
        SearchMode::Random { samples, .. } => {
            format!("{samples} random structures with at most {} worlds", b.max_worlds)
        }
    }
}

fn seed_line(seed: Option<u64>) -> String {
    seed.map(|s| format!("seed: {s}\n")).unwrap_or_default()
}

fn with_seed(mut payload: Value, seed: Option<u64>) -> Value {
    if let Some(s) = seed {
        payload["seed"] = json!(s);
    }
    payload
}

pub fn dispatch(command: Command, parallel: bool) -> Result<RunReport> {
    match command {
        Command::Parse {
            input,
            program,
            judgement,
            core,
        } => parse_cmd(&read_input(&input)?, program, judgement, core),
        Command::Eval { input, model, world } => eval_cmd(&read_input(&input)?, &load_model(&model)?, world.as_deref()),
        Command::Relation { input, model } => {
            let k = load_model(&model)?;
            let p = parse_program(&read_input(&input)?)?;
            let r = relation(&k, &p)?;
            let pairs = pair_names(&k, &r.pairs());
            let text = pairs.iter().map(|[u, v]| format!("{u} -> {v}")).collect::<Vec<_>>().join("\n");
            Ok(RunReport::new(Status::Ok, json!({"program": p.to_string(), "pairs": pairs}), text))
        }
        Command::Witness {
            input,
            model,
            from,
            to,
            cap,
            minimal,
            dot,
        } => witness_cmd(&read_input(&input)?, &load_model(&model)?, &from, &to, cap, minimal, dot),
        Command::Gateway {
            input,
            model,
            from,
            to,
            via,
            verify,
        } => gateway_cmd(&read_input(&input)?, &load_model(&model)?, [&from, &to, &via], verify, parallel),
        Command::Normalize { input, trace } => normalize_cmd(&read_input(&input)?, trace),
        Command::CheckProof { file } => check_proof_cmd(&read_path(&file)?),
        Command::Large { command } => large_cmd(command),
        Command::Sat { input, search } => sat_cmd(&read_input(&input)?, &search, parallel),
        Command::Valid { input, search, minimize } => valid_cmd(&read_input(&input)?, &search, minimize, parallel),
        Command::Pjudge { input, search } => pjudge_cmd(&read_input(&input)?, &search, parallel),
        Command::AxiomsTest {
            depth,
            max_worlds,
            pool,
            instances,
            rule_instances,
            mutant_instances,
            no_mutants,
            report,
            seed,
        } => {
            let opts = HarnessOptions {
                instances,
                rule_instances,
                mutant_instances,
                mutants: !no_mutants,
                seed: seed.unwrap_or_else(rand::random),
            };
            axioms_cmd(depth, max_worlds, pool, opts, report.as_deref(), parallel)
        }
        Command::Fixtures { cyclic_worlds } => fixtures_cmd(cyclic_worlds, parallel),
    }
}

fn parse_cmd(text: &str, program: bool, judgement: bool, core: bool) -> Result<RunReport> {
    let style = RenderStyle { sugar: !core };
    let payload = if judgement {
        let j = parse_judgement(text)?;
        let op = match j.kind {
            JudgementKind::Implies => "=>",
            JudgementKind::Equiv => "<=>",
        };
        let rendered = format!(
            "{} {op} {}",
            render_program_with(&j.left, style),
            render_program_with(&j.right, style)
        );
        json!({"sort": "judgement", "rendered": rendered})
    } else if program {
        let p = parse_program(text)?;
        json!({
            "sort": "program",
            "rendered": render_program_with(&p, style),
            "depth": p.depth(),
            "size": p.size(),
            "vocabulary": p.vocabulary(),
        })
    } else {
        let f = parse(text)?;
        json!({
            "sort": "formula",
            "rendered": render_with(&f, style),
            "depth": f.depth(),
            "size": f.size(),
            "vocabulary": f.vocabulary(),
        })
    };
    let text = payload["rendered"].as_str().unwrap_or_default().to_string();
    Ok(RunReport::new(Status::Ok, payload, text))
}

fn eval_cmd(text: &str, k: &KripkeStructure, world: Option<&str>) -> Result<RunReport> {
    let f = parse(text)?;
    match world {
        Some(name) => {
            let w = k.world(name)?;
            let v = eval(k, w, &f)?;
            Ok(RunReport::new(
                Status::Ok,
                json!({"formula": f.to_string(), "world": name, "value": v}),
                v.to_string(),
            ))
        }
        None => {
            let ws = names(k, formula_set(k, &f)?);
            let text = format!("true at: {}", if ws.is_empty() { "(none)".into() } else { ws.join(", ") });
            Ok(RunReport::new(Status::Ok, json!({"formula": f.to_string(), "worlds": ws}), text))
        }
    }
}

fn witness_cmd(
    text: &str,
    k: &KripkeStructure,
    from: &str,
    to: &str,
    cap: usize,
    minimal: bool,
    dot: bool,
) -> Result<RunReport> {
    let p = parse_program(text)?;
    let (u, v) = (k.world(from)?, k.world(to)?);
    let q = TransitionQuery::new(k, u, &p, v)?;
    let set = witness_graphs(&q, cap)?;
    let mut graphs = Vec::new();
    for g in set.graphs {
        if !minimal || is_minimal_witness(&g, &q)? {
            graphs.push(g);
        }
    }
    let status = if graphs.is_empty() { Status::Refuted } else { Status::Ok };
    let body = if dot {
        graphs.iter().map(|g| g.to_dot(k)).collect::<Vec<_>>().join("\n")
    } else if graphs.is_empty() {
        format!("{from} -{p}-> {to} does not hold")
    } else {
        graphs.iter().enumerate().map(|(i, g)| format!("{i}: {}", graph_text(k, g))).collect::<Vec<_>>().join("\n")
    };
    let mut text = body;
    if set.truncated {
        text.push_str("\n(enumeration truncated at the cap)");
    }
    Ok(RunReport::new(
        status,
        json!({
            "program": p.to_string(),
            "from": from,
            "to": to,
            "graphs": graphs.iter().map(|g| graph_value(k, g)).collect::<Vec<_>>(),
            "truncated": set.truncated,
        }),
        text,
    ))
}

fn gateway_cmd(
    text: &str,
    k: &KripkeStructure,
    [from, to, via]: [&String; 3],
    verify: Option<usize>,
    parallel: bool,
) -> Result<RunReport> {
    let alpha = parse_program(text)?;
    let (u, w, v) = (k.world(from)?, k.world(to)?, k.world(via)?);
    let q = TransitionQuery::new(k, u, &alpha, w)?;
    let set = witness_graphs(&q, DEFAULT_CAP)?;
    let mut chosen = None;
    for g in &set.graphs {
        if is_minimal_witness(g, &q)? && articulation_nodes(g, u, w).is_ok_and(|a| a.contains(&v)) {
            chosen = Some(g);
            break;
        }
    }
    let g = chosen.ok_or_else(|| usage(format!("no minimal witness graph for {from} -> {to} has {via} as an articulation node")))?;
    let (b1, b2) = gateway_split(k, g, u, w, v, &alpha)?;
    let mut payload = json!({
        "program": alpha.to_string(),
        "graph": graph_value(k, g),
        "first": b1.to_string(),
        "second": b2.to_string(),
    });
    let mut text = format!("{b1}\n{b2}");
    let mut status = Status::Ok;
    if let Some(n) = verify {
        let mut b = SearchBudget::exhaustive(n);
        if !parallel {
            b = b.serial();
        }
        let out = check_program_judgement(&Program::seq(b1, b2), &alpha, JudgementKind::Implies, &b)?;
        if out.is_countermodel() {
            status = Status::Countermodel;
        }
        let _ = write!(text, "\nrefines the program on {}: {}", bound_text(&b), !out.is_countermodel());
        payload["verification"] = out.to_json();
    }
    Ok(RunReport::new(status, payload, text))
}

fn normalize_cmd(text: &str, trace: bool) -> Result<RunReport> {
    let f = parse(text)?;
    let (nf, t) = normalize(&f);
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| json!({"rule": s.rule.name(), "path": s.path, "before": s.before.to_string(), "after": s.after.to_string()}))
        .collect();
    let mut out = nf.to_string();
    if trace {
        for s in &t.steps {
            let _ = write!(out, "\n  {:>6} at {:?}: {} => {}", s.rule.name(), s.path, s.before, s.after);
        }
    }
    let mut payload = json!({
        "input": f.to_string(),
        "normal_form": nf.to_string(),
        "is_normal": is_normal(&nf),
        "steps": t.len(),
    });
    if trace {
        payload["trace"] = Value::Array(steps);
    }
    Ok(RunReport::new(Status::Ok, payload, out))
}

fn check_proof_cmd(text: &str) -> Result<RunReport> {
    let p = proof_from_json(text)?;
    let last = p.lines.last().map(|l| l.statement.to_string());
    Ok(match check_proof(&p) {
        Ok(()) => RunReport::new(
            Status::Ok,
            json!({"lines": p.lines.len(), "conclusion": last}),
            format!("ok: {} lines, concludes {}", p.lines.len(), last.unwrap_or_default()),
        ),
        Err(e) => RunReport::new(
            Status::ProofError,
            json!({"lines": p.lines.len(), "line": e.line_id(), "error": e.to_string()}),
            e.to_string(),
        ),
    })
}

fn occurrence_key(o: &Occurrence) -> String {
    if o.is_empty() {
        "root".into()
    } else {
        o.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

fn set_strings(x: &TestSet) -> Vec<String> {
    x.iter().map(|f| f.to_string()).collect()
}

enum LargeInput {
    Transition(LabelledTransition),
    Loop(LargeLoop, TestSet),
}

fn large_input(text: &str) -> Result<LargeInput> {
    let v: Value = serde_json::from_str(text)?;
    if let Some(body) = v.get("loop") {
        let body = LargeProgram::from_value(body)?;
        body.validate()?;
        let phi = test_set_from_value(v.get("phi").ok_or_else(|| usage("a loop needs \"phi\""))?)?;
        return Ok(LargeInput::Loop(LargeLoop::new(body), phi));
    }
    let t = LabelledTransition::from_value(&v)?;
    t.program.validate()?;
    Ok(LargeInput::Transition(t))
}

fn gap_value(g: &BTreeMap<Occurrence, TestSet>) -> (Value, String) {
    let mut m = serde_json::Map::new();
    let mut text = String::new();
    for (o, x) in g {
        m.insert(occurrence_key(o), json!(set_strings(x)));
        let _ = writeln!(text, "{}: {}", occurrence_key(o), if x.is_empty() { "saturated".into() } else { set_strings(x).join(", ") });
    }
    (Value::Object(m), text)
}

fn large_cmd(c: LargeCommand) -> Result<RunReport> {
    match c {
        LargeCommand::CheckTransition { input } => match large_input(&read_input(&input)?)? {
            LargeInput::Transition(t) => {
                let ok = is_consistent_transition(&t);
                Ok(RunReport::new(
                    if ok { Status::Ok } else { Status::Refuted },
                    json!({"consistent": ok}),
                    if ok { "consistent" } else { "inconsistent" },
                ))
            }
            LargeInput::Loop(l, phi) => {
                let ok = is_consistent_loop(&l, &phi);
                let forbidden: Vec<Value> = forbidden_loop_members(&l, &phi)
                    .iter()
                    .map(|(o, f)| json!({"test": occurrence_key(o), "formula": f.to_string()}))
                    .collect();
                Ok(RunReport::new(
                    if ok { Status::Ok } else { Status::Refuted },
                    json!({"consistent": ok, "forbidden": forbidden}),
                    if ok { "consistent" } else { "inconsistent" },
                ))
            }
        },
        LargeCommand::Instances { input, limit } => {
            let l = LargeProgram::from_json(&read_input(&input)?)?;
            l.validate()?;
            let n = l.instance_count();
            if n > MAX_ENUMERATED {
                return Err(usage(format!("{n} instances is more than the {MAX_ENUMERATED} this command enumerates")));
            }
            let all: Vec<String> = enumerate_instances(&l).into_iter().take(limit).map(|p| p.to_string()).collect();
            let text = all.join("\n");
            Ok(RunReport::new(Status::Ok, json!({"count": n.to_string(), "instances": all}), text))
        }
        LargeCommand::Gap { input } => {
            let g = match large_input(&read_input(&input)?)? {
                LargeInput::Transition(t) => saturation_gap(&t),
                LargeInput::Loop(l, phi) => loop_saturation_gap(&l, &phi),
            };
            let (v, text) = gap_value(&g);
            Ok(RunReport::new(Status::Ok, json!({"gaps": v}), text))
        }
        LargeCommand::Lift { input } => {
            let l = lift(&parse_program(&read_input(&input)?)?)?;
            Ok(RunReport::new(Status::Ok, json!({"large": l.to_value()}), l.to_string()))
        }
        LargeCommand::Leq { input } => {
            let v: Value = serde_json::from_str(&read_input(&input)?)?;
            let [a, b] = v.as_array().map(Vec::as_slice).and_then(|s| <&[Value; 2]>::try_from(s).ok()).ok_or_else(|| usage("expected a JSON array [l1, l2]"))?;
            let (a, b) = (LargeProgram::from_value(a)?, LargeProgram::from_value(b)?);
            let r = leq(&a, &b);
            Ok(RunReport::new(
                if r { Status::Ok } else { Status::Refuted },
                json!({"leq": r}),
                format!("{a} <= {b}: {r}"),
            ))
        }
    }
}

fn model_payload(k: &KripkeStructure, w: usize) -> Value {
    json!({"worlds": k.size(), "world": k.world_name(w), "structure": k.to_value()})
}

fn sat_cmd(text: &str, s: &SearchArgs, parallel: bool) -> Result<RunReport> {
    let f = parse(text)?;
    let (b, seed) = budget(s, parallel);
    let out = find_model(&f, &b)?;
    Ok(match &out {
        SearchOutcome::ModelFound { structure, world } => RunReport::new(
            Status::Ok,
            with_seed(model_payload(structure, *world), seed),
            format!(
                "{}model with {} worlds at {}:\n{}",
                seed_line(seed),
                structure.size(),
                structure.world_name(*world),
                structure.to_json()
            ),
        ),
        _ => RunReport::new(
            Status::NoModelBounded,
            with_seed(out.to_json(), seed),
            format!(
                "{}no model among {}; this bounds the search and does not show unsatisfiability",
                seed_line(seed),
                bound_text(&b)
            ),
        ),
    })
}

fn valid_cmd(text: &str, s: &SearchArgs, minimize: bool, parallel: bool) -> Result<RunReport> {
    let f = parse(text)?;
    let (b, seed) = budget(s, parallel);
    let out = check_validity(&f, &b)?;
    Ok(match &out {
        SearchOutcome::Countermodel { structure, world, .. } => {
            let (k, w) = if minimize {
                minimize_countermodel(structure, *world, &f)?
            } else {
                (structure.clone(), *world)
            };
            RunReport::new(
                Status::Countermodel,
                with_seed(model_payload(&k, w), seed),
                format!("{}countermodel with {} worlds at {}:\n{}", seed_line(seed), k.size(), k.world_name(w), k.to_json()),
            )
        }
        _ => RunReport::new(
            Status::Ok,
            with_seed(out.to_json(), seed),
            format!("{}true on {}; larger structures were not checked", seed_line(seed), bound_text(&b)),
        ),
    })
}

fn pjudge_cmd(text: &str, s: &SearchArgs, parallel: bool) -> Result<RunReport> {
    let j = parse_judgement(text)?;
    let (b, seed) = budget(s, parallel);
    let out = check_program_judgement(&j.left, &j.right, j.kind, &b)?;
    Ok(match &out {
        SearchOutcome::Countermodel { structure, pair, .. } => {
            let pair = pair.map(|(u, v)| [structure.world_name(u).to_string(), structure.world_name(v).to_string()]);
            let mut payload = with_seed(out.to_json(), seed);
            payload["pair"] = json!(pair);
            RunReport::new(
                Status::Countermodel,
                payload,
                format!(
                    "{}countermodel with {} worlds, separating pair {:?}:\n{}",
                    seed_line(seed),
                    structure.size(),
                    pair.unwrap_or_default(),
                    structure.to_json()
                ),
            )
        }
        _ => RunReport::new(
            Status::Ok,
            with_seed(out.to_json(), seed),
            format!("{}holds on {}; larger structures were not checked", seed_line(seed), bound_text(&b)),
        ),
    })
}

fn axioms_cmd(
    depth: usize,
    max_worlds: usize,
    pool_size: usize,
    opts: HarnessOptions,
    report_path: Option<&Path>,
    parallel: bool,
) -> Result<RunReport> {
    let vocab = Vocabulary::new(["p", "q"], ["a", "b"]).expect("fixed vocabulary");
    let pool = InstancePool::random(&vocab, depth, pool_size, opts.seed);
    let mut b = SearchBudget::exhaustive(max_worlds);
    if !parallel {
        b = b.serial();
    }
    let r = soundness_harness(&pool, &opts, &b)?;
    let json = r.to_json();
    if let Some(p) = report_path {
        std::fs::write(p, serde_json::to_string_pretty(&json)?).with_context(|| format!("writing {}", p.display()))?;
    }
    let mut text = format!("seed: {}\nstructures checked: {}\n", opts.seed, r.structures);
    let _ = writeln!(text, "{:<22} {:<7} {:>9} {:>11} {:>8}", "entry", "kind", "instances", "nonvacuous", "failures");
    for e in &r.entries {
        let _ = writeln!(text, "{:<22} {:<7} {:>9} {:>11} {:>8}", e.name, e.kind.name(), e.instances, e.nonvacuous, e.failures);
    }
    let unsound: Vec<&str> = r.unsound().iter().map(|e| e.name.as_str()).collect();
    let (caught, total) = r.mutants_caught();
    let missed: Vec<&str> = r
        .entries
        .iter()
        .filter(|e| e.kind == EntryKind::Mutant && e.failures == 0)
        .map(|e| e.name.as_str())
        .collect();
    let _ = writeln!(text, "unsound: {}", if unsound.is_empty() { "none".into() } else { unsound.join(", ") });
    if opts.mutants {
        let _ = writeln!(text, "mutants caught: {caught}/{total}");
    }
    for w in &r.warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let status = if !unsound.is_empty() {
        Status::Countermodel
    } else if !missed.is_empty() {
        Status::Refuted
    } else {
        Status::Ok
    };
    Ok(RunReport::new(status, json, text))
}

fn fixtures_cmd(cyclic_worlds: usize, parallel: bool) -> Result<RunReport> {
    let opts = FixtureOptions {
        cyclic_worlds,
        parallel,
        ..FixtureOptions::default()
    };
    let results = run_fixtures(&opts)?;
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(text, "{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
    }
    if let Some(h) = results.iter().find(|r| r.name == "harness" && !r.passed) {
        let _ = writeln!(text, "  unsound: {}", h.detail["unsound"]);
    }
    let all = results.iter().all(|r| r.passed);
    let payload = json!(results
        .iter()
        .map(|r| json!({"name": r.name, "passed": r.passed, "detail": r.detail}))
        .collect::<Vec<_>>());
    Ok(RunReport::new(if all { Status::Ok } else { Status::Refuted }, payload, text))
}
