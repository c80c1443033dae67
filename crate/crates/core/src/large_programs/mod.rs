//! Large programs: programs whose tests carry finite sets of formulae.
//!
//! Sequences are compared modulo associativity throughout: an ordinary
//! program is matched against a large one by its flattened `;`-factors.

mod consistency;
mod instances;
mod labels;

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::syntax::{parse, render, Formula, Program, SyntaxError};

pub use consistency::{
    forbidden_loop_members, is_consistent_loop, is_consistent_transition, loop_saturation_gap,
    saturation_gap,
};
pub use instances::{canonical_formula, canonical_program, enumerate_instances, is_instance, leq, lift};
pub use labels::{left_right_sets, loop_left_right_programs, Occurrence};

pub type TestSet = BTreeSet<Formula>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LargeError {
    #[error("not liftable: {0}")]
    Shape(String),
    #[error("empty test set at {0:?}")]
    EmptyTestSet(Occurrence),
    #[error("malformed large program: {0}")]
    Json(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// `Atomic`, `Inter` and `SeqTest` are the grammar proper. `Test` and `Seq`
/// only occur in the context programs built for loops (`lp`/`rp`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LargeProgram {
    Atomic(String),
    Inter(Box<LargeProgram>, Box<LargeProgram>),
    SeqTest(Box<LargeProgram>, TestSet, Box<LargeProgram>),
    Test(TestSet),
    Seq(Box<LargeProgram>, Box<LargeProgram>),
}

impl LargeProgram {
    pub fn atomic(a: impl Into<String>) -> Self {
        LargeProgram::Atomic(a.into())
    }

    pub fn inter(a: LargeProgram, b: LargeProgram) -> Self {
        LargeProgram::Inter(Box::new(a), Box::new(b))
    }

    pub fn seq_test(a: LargeProgram, x: impl IntoIterator<Item = Formula>, b: LargeProgram) -> Self {
        LargeProgram::SeqTest(Box::new(a), x.into_iter().collect(), Box::new(b))
    }

    pub fn test(x: impl IntoIterator<Item = Formula>) -> Self {
        LargeProgram::Test(x.into_iter().collect())
    }

    pub fn seq(a: LargeProgram, b: LargeProgram) -> Self {
        LargeProgram::Seq(Box::new(a), Box::new(b))
    }

    /// Built from `Atomic`, `Inter` and `SeqTest` only.
    pub fn is_grammatical(&self) -> bool {
        match self {
            LargeProgram::Atomic(_) => true,
            LargeProgram::Inter(a, b) | LargeProgram::SeqTest(a, _, b) => a.is_grammatical() && b.is_grammatical(),
            LargeProgram::Test(_) | LargeProgram::Seq(..) => false,
        }
    }

    /// Every test set is nonempty.
    pub fn validate(&self) -> Result<(), LargeError> {
        fn go(l: &LargeProgram, path: &mut Occurrence) -> Result<(), LargeError> {
            match l {
                LargeProgram::Atomic(_) => Ok(()),
                LargeProgram::Test(x) if x.is_empty() => Err(LargeError::EmptyTestSet(path.clone())),
                LargeProgram::Test(_) => Ok(()),
                LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) => {
                    path.push(0);
                    go(a, path)?;
                    path.pop();
                    path.push(1);
                    go(b, path)?;
                    path.pop();
                    Ok(())
                }
                LargeProgram::SeqTest(a, x, b) => {
                    if x.is_empty() {
                        path.push(1);
                        return Err(LargeError::EmptyTestSet(path.clone()));
                    }
                    path.push(0);
                    go(a, path)?;
                    path.pop();
                    path.push(2);
                    go(b, path)?;
                    path.pop();
                    Ok(())
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Number of test-set positions.
    pub fn test_positions(&self) -> usize {
        match self {
            LargeProgram::Atomic(_) => 0,
            LargeProgram::Test(_) => 1,
            LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) => a.test_positions() + b.test_positions(),
            LargeProgram::SeqTest(a, _, b) => 1 + a.test_positions() + b.test_positions(),
        }
    }

    /// Product of the test-set sizes.
    pub fn instance_count(&self) -> u128 {
        match self {
            LargeProgram::Atomic(_) => 1,
            LargeProgram::Test(x) => x.len() as u128,
            LargeProgram::Inter(a, b) | LargeProgram::Seq(a, b) => a.instance_count() * b.instance_count(),
            LargeProgram::SeqTest(a, x, b) => a.instance_count() * x.len() as u128 * b.instance_count(),
        }
    }

    pub fn subprogram(&self, path: &[usize]) -> Option<&LargeProgram> {
        let Some((&i, rest)) = path.split_first() else { return Some(self) };
        match (self, i) {
            (LargeProgram::Inter(a, _) | LargeProgram::Seq(a, _) | LargeProgram::SeqTest(a, _, _), 0) => a.subprogram(rest),
            (LargeProgram::Inter(_, b) | LargeProgram::Seq(_, b), 1) => b.subprogram(rest),
            (LargeProgram::SeqTest(_, _, b), 2) => b.subprogram(rest),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, LargeError> {
        let v: Value = serde_json::from_str(text).map_err(|e| LargeError::Json(e.to_string()))?;
        Self::from_value(&v)
    }

    /// `"a"`, `{"inter": [l, r]}`, `{"seq": [l, ["p", ...], r]}`,
    /// `{"test": [...]}` or `{"then": [l, r]}`.
    pub fn from_value(v: &Value) -> Result<Self, LargeError> {
        let bad = |m: &str| LargeError::Json(format!("{m}: {v}"));
        if let Some(a) = v.as_str() {
            return Ok(LargeProgram::atomic(a));
        }
        let obj = v.as_object().ok_or_else(|| bad("expected a string or an object"))?;
        if obj.len() != 1 {
            return Err(bad("expected exactly one key"));
        }
        let (k, body) = obj.iter().next().expect("one key");
        let items = body.as_array().ok_or_else(|| bad("expected an array"))?;
        match (k.as_str(), items.as_slice()) {
            ("inter", [a, b]) => Ok(LargeProgram::inter(Self::from_value(a)?, Self::from_value(b)?)),
            ("then", [a, b]) => Ok(LargeProgram::seq(Self::from_value(a)?, Self::from_value(b)?)),
            ("seq", [a, x, b]) => Ok(LargeProgram::SeqTest(
                Box::new(Self::from_value(a)?),
                test_set_from_value(x)?,
                Box::new(Self::from_value(b)?),
            )),
            ("test", _) => Ok(LargeProgram::Test(test_set_from_value(body)?)),
            _ => Err(bad("unknown large-program form")),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            LargeProgram::Atomic(a) => json!(a),
            LargeProgram::Inter(a, b) => json!({"inter": [a.to_value(), b.to_value()]}),
            LargeProgram::Seq(a, b) => json!({"then": [a.to_value(), b.to_value()]}),
            LargeProgram::SeqTest(a, x, b) => json!({"seq": [a.to_value(), test_set_to_value(x), b.to_value()]}),
            LargeProgram::Test(x) => json!({"test": test_set_to_value(x)}),
        }
    }
}

pub fn test_set_from_value(v: &Value) -> Result<TestSet, LargeError> {
    let items = v
        .as_array()
        .ok_or_else(|| LargeError::Json(format!("test set must be an array of formulae: {v}")))?;
    items
        .iter()
        .map(|x| {
            let s = x
                .as_str()
                .ok_or_else(|| LargeError::Json(format!("formula must be a string: {x}")))?;
            Ok(parse(s)?)
        })
        .collect()
}

pub fn test_set_to_value(x: &TestSet) -> Value {
    Value::Array(x.iter().map(|f| Value::String(render(f))).collect())
}

fn show_set(x: &TestSet) -> String {
    let items: Vec<String> = x.iter().map(render).collect();
    format!("{{{}}}", items.join(", "))
}

impl fmt::Display for LargeProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `;` binds tighter than `&`, so only intersections inside a
        // sequence need parentheses.
        fn seq_operand(l: &LargeProgram) -> String {
            match l {
                LargeProgram::Inter(..) => format!("({l})"),
                _ => l.to_string(),
            }
        }
        match self {
            LargeProgram::Atomic(a) => write!(f, "{a}"),
            LargeProgram::Inter(a, b) => {
                let right = match **b {
                    LargeProgram::Inter(..) => format!("({b})"),
                    _ => b.to_string(),
                };
                write!(f, "{a} & {right}")
            }
            LargeProgram::SeqTest(a, x, b) => write!(f, "{};{}?;{}", seq_operand(a), show_set(x), seq_operand(b)),
            LargeProgram::Test(x) => write!(f, "{}?", show_set(x)),
            LargeProgram::Seq(a, b) => write!(f, "{};{}", seq_operand(a), seq_operand(b)),
        }
    }
}

/// `Φ →α→ Ψ` with finite label sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledTransition {
    pub left: TestSet,
    pub program: LargeProgram,
    pub right: TestSet,
}

impl LabelledTransition {
    pub fn new(
        left: impl IntoIterator<Item = Formula>,
        program: LargeProgram,
        right: impl IntoIterator<Item = Formula>,
    ) -> Self {
        LabelledTransition {
            left: left.into_iter().collect(),
            program,
            right: right.into_iter().collect(),
        }
    }

    /// `{"left": [...], "program": ..., "right": [...]}`.
    pub fn from_value(v: &Value) -> Result<Self, LargeError> {
        let get = |k: &str| v.get(k).ok_or_else(|| LargeError::Json(format!("missing \"{k}\"")));
        Ok(LabelledTransition {
            left: test_set_from_value(get("left")?)?,
            program: LargeProgram::from_value(get("program")?)?,
            right: test_set_from_value(get("right")?)?,
        })
    }

    pub fn to_value(&self) -> Value {
        json!({
            "left": test_set_to_value(&self.left),
            "program": self.program.to_value(),
            "right": test_set_to_value(&self.right),
        })
    }
}

/// `body^⟲`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargeLoop {
    pub body: LargeProgram,
}

impl LargeLoop {
    pub fn new(body: LargeProgram) -> Self {
        LargeLoop { body }
    }
}

impl fmt::Display for LargeLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.body {
            LargeProgram::Atomic(_) => write!(f, "{}^", self.body),
            _ => write!(f, "({})^", self.body),
        }
    }
}

/// Loose program check used by `lift`: no `∪` anywhere outside tests.
pub(crate) fn union_free(p: &Program) -> bool {
    match p {
        Program::Atomic(_) | Program::Test(_) => true,
        Program::Union(..) => false,
        Program::Seq(a, b) | Program::Inter(a, b) => union_free(a) && union_free(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn display_and_json_round_trip() {
        let l = LargeProgram::seq_test(
            LargeProgram::inter(LargeProgram::atomic("a"), LargeProgram::atomic("c")),
            [p("p"), p("q")],
            LargeProgram::atomic("b"),
        );
        assert_eq!(l.to_string(), "(a & c);{p, q}?;b");
        assert_eq!(LargeProgram::from_value(&l.to_value()).unwrap(), l);
        assert_eq!(l.test_positions(), 1);
        assert_eq!(l.instance_count(), 2);
        assert!(l.is_grammatical());
        let t = LabelledTransition::new([p("[a]~q")], l, [p("q")]);
        assert_eq!(LabelledTransition::from_value(&t.to_value()).unwrap(), t);
    }

    #[test]
    fn json_forms() {
        let l = LargeProgram::from_json(r#"{"seq": ["a", ["p"], {"inter": ["b", "c"]}]}"#).unwrap();
        assert_eq!(l.to_string(), "a;{p}?;(b & c)");
        assert!(LargeProgram::from_json(r#"{"seq": ["a", "p", "b"]}"#).is_err());
        assert!(LargeProgram::from_json(r#"{"loop": ["a"]}"#).is_err());
    }

    #[test]
    fn empty_test_sets_rejected() {
        let l = LargeProgram::inter(
            LargeProgram::atomic("a"),
            LargeProgram::seq_test(LargeProgram::atomic("a"), [], LargeProgram::atomic("b")),
        );
        assert_eq!(l.validate(), Err(LargeError::EmptyTestSet(vec![1, 1])));
        assert_eq!(l.subprogram(&[1, 2]), Some(&LargeProgram::atomic("b")));
        assert_eq!(l.subprogram(&[1, 1]), None);
    }
}
