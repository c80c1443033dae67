use super::ast::{Formula, Program};

/// Printing style. `sugar` re-introduces `false`, `&`, `->`, `<->` and boxes
/// where the core tree has their expansion shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderStyle {
    pub sugar: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle { sugar: true }
    }
}

// Binding strength; larger binds tighter.
const F_IFF: u8 = 1;
const F_IMP: u8 = 2;
const F_OR: u8 = 3;
const F_AND: u8 = 4;
const F_UNARY: u8 = 5;

const P_UNION: u8 = 1;
const P_INTER: u8 = 2;
const P_SEQ: u8 = 3;
const P_POST: u8 = 4;

fn wrap(s: String, level: u8, min: u8) -> String {
    if level < min {
        format!("({s})")
    } else {
        s
    }
}

pub fn render_formula(f: &Formula, style: RenderStyle) -> String {
    formula(f, style).0
}

pub fn render_program_with(p: &Program, style: RenderStyle) -> String {
    program(p, style).0
}

fn formula(f: &Formula, st: RenderStyle) -> (String, u8) {
    if st.sugar {
        if f.is_bot() {
            return ("false".into(), F_UNARY);
        }
        if let Some((a, b)) = f.as_iff() {
            let (l, ll) = formula(a, st);
            let (r, rl) = formula(b, st);
            return (
                format!("{} <-> {}", wrap(l, ll, F_IFF + 1), wrap(r, rl, F_IFF)),
                F_IFF,
            );
        }
        if let Some((a, b)) = f.as_and() {
            let (l, ll) = formula(a, st);
            let (r, rl) = formula(b, st);
            return (
                format!("{} & {}", wrap(l, ll, F_AND), wrap(r, rl, F_AND + 1)),
                F_AND,
            );
        }
        if let Some((p, body)) = f.as_box() {
            let (b, bl) = formula(body, st);
            return (
                format!("[{}]{}", program(p, st).0, wrap(b, bl, F_UNARY)),
                F_UNARY,
            );
        }
        if let Some((a, b)) = f.as_implies() {
            let (l, ll) = formula(a, st);
            let (r, rl) = formula(b, st);
            return (
                format!("{} -> {}", wrap(l, ll, F_IMP + 1), wrap(r, rl, F_IMP)),
                F_IMP,
            );
        }
    }
    match f {
        Formula::True => ("true".into(), F_UNARY),
        Formula::Prop(p) => (p.clone(), F_UNARY),
        Formula::Not(inner) => {
            let (s, l) = formula(inner, st);
            (format!("~{}", wrap(s, l, F_UNARY)), F_UNARY)
        }
        Formula::Or(a, b) => {
            let (l, ll) = formula(a, st);
            let (r, rl) = formula(b, st);
            (
                format!("{} | {}", wrap(l, ll, F_OR), wrap(r, rl, F_OR + 1)),
                F_OR,
            )
        }
        Formula::Diamond(p, body) => {
            let (b, bl) = formula(body, st);
            (
                format!("<{}>{}", program(p, st).0, wrap(b, bl, F_UNARY)),
                F_UNARY,
            )
        }
    }
}

fn program(p: &Program, st: RenderStyle) -> (String, u8) {
    if let Some(inner) = p.as_loop() {
        let (s, l) = program(inner, st);
        return (format!("{}^", wrap(s, l, P_POST)), P_POST);
    }
    match p {
        Program::Atomic(a) => (a.clone(), P_POST + 1),
        Program::Test(f) => {
            let (s, l) = formula(f, st);
            (format!("{}?", wrap(s, l, F_UNARY)), P_POST + 1)
        }
        Program::Seq(a, b) => binary(a, b, ";", P_SEQ, st),
        Program::Inter(a, b) => binary(a, b, " & ", P_INTER, st),
        Program::Union(a, b) => binary(a, b, " + ", P_UNION, st),
    }
}

fn binary(a: &Program, b: &Program, op: &str, level: u8, st: RenderStyle) -> (String, u8) {
    let (l, ll) = program(a, st);
    let (r, rl) = program(b, st);
    (
        format!("{}{}{}", wrap(l, ll, level), op, wrap(r, rl, level + 1)),
        level,
    )
}
