//! Proof files: `{"lines": [{"id": 1, "stmt": "...", "by": {...}}, ...]}`.
//!
//! `by` is one of
//! `{"taut": true}` or `{"taut": ["atom", ...]}`,
//! `{"axiom": "K", "binding": {"alpha": "a", "p": "q"}}` (binding optional),
//! `{"paxiom": "Wk"}`, `{"paxiom": "C", "binding": {...}, "occurrences": "one"}`,
//! `{"mp": [i, j]}`, `{"gen": i, "program": "a"}`,
//! `{"usub": i, "prop": "p", "formula": "q"}`, `{"psub": [i, j]}`,
//! `{"tp": i}`, `{"struct": "Trans", "refs": [i, j]}`.
//!
//! Line ids run 1, 2, ... in order. Unknown keys are rejected so that a
//! misspelt optional field cannot silently fall back to its default.

use serde_json::{json, Map, Value};

use super::proof::{Justification, Proof, ProofLine, Statement, StructKind};
use super::schemes::{scheme, Binding, Occurrences};
use super::ProofError;
use crate::syntax::{parse, parse_program, render, render_program};

fn bad(msg: impl Into<String>) -> ProofError {
    ProofError::Format(msg.into())
}

pub fn proof_from_json(text: &str) -> Result<Proof, ProofError> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    proof_from_value(&v)
}

pub fn proof_from_value(v: &Value) -> Result<Proof, ProofError> {
    let lines = v
        .get("lines")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing \"lines\" array"))?;
    let mut out = Vec::with_capacity(lines.len());
    for (k, l) in lines.iter().enumerate() {
        let id = l
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad(format!("line #{k}: missing numeric id")))? as usize;
        let ctx = |m: String| bad(format!("line {id}: {m}"));
        if id != k + 1 {
            return Err(ctx(format!("expected id {}", k + 1)));
        }
        let obj = l.as_object().ok_or_else(|| ctx("line must be an object".into()))?;
        only_keys(obj, &["id", "stmt", "by", "note"]).map_err(ctx)?;
        let stmt = l
            .get("stmt")
            .and_then(Value::as_str)
            .ok_or_else(|| ctx("missing \"stmt\" string".into()))?;
        let statement = Statement::parse(stmt).map_err(|e| ctx(e.to_string()))?;
        let by = l
            .get("by")
            .and_then(Value::as_object)
            .ok_or_else(|| ctx("missing \"by\" object".into()))?;
        let justification = justification(by).map_err(ctx)?;
        out.push(ProofLine {
            id,
            statement,
            justification,
        });
    }
    Ok(Proof { lines: out })
}

fn index(v: &Value) -> Result<usize, String> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| format!("expected a line id, found {v}"))
}

fn pair(v: &Value) -> Result<(usize, usize), String> {
    match v.as_array().map(Vec::as_slice) {
        Some([a, b]) => Ok((index(a)?, index(b)?)),
        _ => Err(format!("expected [i, j], found {v}")),
    }
}

fn string<'a>(by: &'a Map<String, Value>, key: &str) -> Result<&'a str, String> {
    by.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| format!("missing \"{key}\" string"))
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Result<(), String> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(format!("unexpected key \"{k}\"")),
        None => Ok(()),
    }
}

const JUSTIFICATION_KEYS: [(&str, &[&str]); 9] = [
    ("taut", &["taut"]),
    ("axiom", &["axiom", "binding"]),
    ("paxiom", &["paxiom", "binding", "occurrences"]),
    ("mp", &["mp"]),
    ("gen", &["gen", "program"]),
    ("usub", &["usub", "prop", "formula"]),
    ("psub", &["psub"]),
    ("tp", &["tp"]),
    ("struct", &["struct", "refs"]),
];

fn justification(by: &Map<String, Value>) -> Result<Justification, String> {
    let allowed = JUSTIFICATION_KEYS
        .iter()
        .find(|(k, _)| by.contains_key(*k))
        .map(|(_, keys)| *keys)
        .ok_or("unrecognised justification")?;
    only_keys(by, allowed)?;
    if let Some(t) = by.get("taut") {
        let atoms = match t {
            Value::Bool(true) => None,
            Value::Array(xs) => Some(
                xs.iter()
                    .map(|x| {
                        let s = x.as_str().ok_or("taut atoms must be strings")?;
                        parse(s).map_err(|e| e.to_string())
                    })
                    .collect::<Result<Vec<_>, String>>()?,
            ),
            _ => return Err("\"taut\" must be true or a list of atoms".into()),
        };
        return Ok(Justification::Taut { atoms });
    }
    if let Some(name) = by.get("axiom") {
        let name = name.as_str().ok_or("\"axiom\" must be a string")?;
        return Ok(Justification::AxiomFormula {
            name: name.to_string(),
            binding: binding(name, by.get("binding"))?,
        });
    }
    if let Some(name) = by.get("paxiom") {
        let name = name.as_str().ok_or("\"paxiom\" must be a string")?;
        let occurrences = match by.get("occurrences").and_then(Value::as_str) {
            None | Some("all") => Occurrences::All,
            Some("one") => Occurrences::One,
            Some(o) => return Err(format!("unknown occurrences mode {o}")),
        };
        return Ok(Justification::AxiomProgram {
            name: name.to_string(),
            binding: binding(name, by.get("binding"))?,
            occurrences,
        });
    }
    if let Some(v) = by.get("mp") {
        let (i, j) = pair(v)?;
        return Ok(Justification::MP(i, j));
    }
    if let Some(v) = by.get("gen") {
        let program = match by.get("program") {
            None => None,
            Some(p) => Some(parse_program(p.as_str().ok_or("\"program\" must be a string")?).map_err(|e| e.to_string())?),
        };
        return Ok(Justification::Gen { line: index(v)?, program });
    }
    if let Some(v) = by.get("usub") {
        let formula = parse(string(by, "formula")?).map_err(|e| e.to_string())?;
        return Ok(Justification::USub {
            line: index(v)?,
            prop: string(by, "prop")?.to_string(),
            formula,
        });
    }
    if let Some(v) = by.get("psub") {
        let (line, judgement) = pair(v)?;
        return Ok(Justification::PSub { line, judgement });
    }
    if let Some(v) = by.get("tp") {
        return Ok(Justification::TestProgram(index(v)?));
    }
    if let Some(v) = by.get("struct") {
        let name = v.as_str().ok_or("\"struct\" must be a string")?;
        let kind = StructKind::from_name(name).ok_or_else(|| format!("unknown structural rule {name}"))?;
        let refs = match by.get("refs") {
            None => vec![],
            Some(r) => r
                .as_array()
                .ok_or("\"refs\" must be an array")?
                .iter()
                .map(index)
                .collect::<Result<_, _>>()?,
        };
        return Ok(Justification::Struct { kind, refs });
    }
    Err("unrecognised justification".into())
}

fn binding(name: &str, v: Option<&Value>) -> Result<Option<Binding>, String> {
    let Some(v) = v else { return Ok(None) };
    let obj = v.as_object().ok_or("\"binding\" must be an object")?;
    let s = scheme(name).ok_or_else(|| format!("unknown axiom {name}"))?;
    let mut b = Binding::new();
    for (k, val) in obj {
        let text = val.as_str().ok_or_else(|| format!("binding for {k} must be a string"))?;
        if s.formula_vars.contains(k) {
            b.formulas.insert(k.clone(), parse(text).map_err(|e| format!("{k}: {e}"))?);
        } else if s.program_vars.contains(k) {
            b.programs.insert(k.clone(), parse_program(text).map_err(|e| format!("{k}: {e}"))?);
        } else {
            return Err(format!("({name}) has no metavariable {k}"));
        }
    }
    Ok(Some(b))
}

fn binding_value(b: &Binding) -> Value {
    let mut m = Map::new();
    for (k, f) in &b.formulas {
        m.insert(k.clone(), Value::String(render(f)));
    }
    for (k, p) in &b.programs {
        m.insert(k.clone(), Value::String(render_program(p)));
    }
    Value::Object(m)
}

pub fn proof_to_json(p: &Proof) -> Value {
    let lines: Vec<Value> = p
        .lines
        .iter()
        .map(|l| {
            let by = match &l.justification {
                Justification::Taut { atoms: None } => json!({"taut": true}),
                Justification::Taut { atoms: Some(a) } => json!({"taut": a.iter().map(render).collect::<Vec<_>>()}),
                Justification::AxiomFormula { name, binding } => {
                    let mut m = json!({"axiom": name});
                    if let Some(b) = binding {
                        m["binding"] = binding_value(b);
                    }
                    m
                }
                Justification::AxiomProgram { name, binding, occurrences } => {
                    let mut m = json!({"paxiom": name});
                    if let Some(b) = binding {
                        m["binding"] = binding_value(b);
                    }
                    if *occurrences == Occurrences::One {
                        m["occurrences"] = json!("one");
                    }
                    m
                }
                Justification::MP(i, j) => json!({"mp": [i, j]}),
                Justification::Gen { line, program } => {
                    let mut m = json!({"gen": line});
                    if let Some(p) = program {
                        m["program"] = json!(render_program(p));
                    }
                    m
                }
                Justification::USub { line, prop, formula } => {
                    json!({"usub": line, "prop": prop, "formula": render(formula)})
                }
                Justification::PSub { line, judgement } => json!({"psub": [line, judgement]}),
                Justification::TestProgram(i) => json!({"tp": i}),
                Justification::Struct { kind, refs } => json!({"struct": kind.name(), "refs": refs}),
            };
            let stmt = match &l.statement {
                Statement::Formula(f) => render(f),
                Statement::Judgement(j) => j.to_string(),
            };
            json!({"id": l.id, "stmt": stmt, "by": by})
        })
        .collect();
    json!({ "lines": lines })
}
