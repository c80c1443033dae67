use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use crate::syntax::{parse, parse_judgement, Formula, Judgement, JudgementKind, Program, SyntaxError};

/// Values for the metavariables of a scheme. Formula metavariables are the
/// proposition names of the pattern, program metavariables its atomic names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Binding {
    pub formulas: BTreeMap<String, Formula>,
    pub programs: BTreeMap<String, Program>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn formula(mut self, name: &str, f: Formula) -> Self {
        self.formulas.insert(name.to_string(), f);
        self
    }

    pub fn program(mut self, name: &str, p: Program) -> Self {
        self.programs.insert(name.to_string(), p);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeBody {
    Formula(Formula),
    Judgement(Judgement),
    /// Premise-free rule with a substitution side condition; checked by
    /// [`check_rule_c`] rather than by pattern matching.
    CycleTransfer,
    /// Crosses sorts; used as a rule between a formula line and a judgement.
    TestProgram,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    pub name: &'static str,
    pub text: &'static str,
    pub body: SchemeBody,
    pub formula_vars: BTreeSet<String>,
    pub program_vars: BTreeSet<String>,
}

impl Scheme {
    /// A pattern scheme from text: a judgement if it contains `=>`, else a
    /// formula. Proposition names become formula metavariables and atomic
    /// names program metavariables.
    pub fn custom(name: &'static str, text: &'static str) -> Result<Scheme, SyntaxError> {
        let (body, v) = if text.contains("=>") {
            let j = parse_judgement(text)?;
            let v = j.left.vocabulary().union(&j.right.vocabulary());
            (SchemeBody::Judgement(j), v)
        } else {
            let f = parse(text)?;
            let v = f.vocabulary();
            (SchemeBody::Formula(f), v)
        };
        Ok(Scheme {
            name,
            text,
            body,
            formula_vars: v.props,
            program_vars: v.programs,
        })
    }

    pub fn is_program_axiom(&self) -> bool {
        !matches!(self.body, SchemeBody::Formula(_))
    }

    /// Substitute `b` into the pattern. `None` if a metavariable is unbound
    /// or the scheme has no pattern.
    pub fn instantiate(&self, b: &Binding) -> Option<Instance> {
        match &self.body {
            SchemeBody::Formula(f) => Some(Instance::Formula(inst_f(f, b)?)),
            SchemeBody::Judgement(j) => Some(Instance::Judgement(Judgement::new(
                j.kind,
                inst_p(&j.left, b)?,
                inst_p(&j.right, b)?,
            ))),
            SchemeBody::CycleTransfer => {
                let get = |n: &str| b.programs.get(n).cloned();
                let j = rule_c_judgement(
                    &get("alpha")?,
                    &get("beta1")?,
                    &get("beta2")?,
                    &get("beta3")?,
                    b.formulas.get("p")?,
                    Occurrences::All,
                )
                .ok()?;
                Some(Instance::Judgement(j))
            }
            SchemeBody::TestProgram => {
                let phi = b.formulas.get("phi")?.clone();
                let psi = b.formulas.get("psi")?.clone();
                Some(Instance::TestProgram(phi, psi))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Formula(Formula),
    Judgement(Judgement),
    /// `(phi <-> psi)` paired with `phi? <=> psi?`.
    TestProgram(Formula, Formula),
}

const FORMULA_SCHEMES: &[(&str, &str)] = &[
    ("Dl", "<alpha>p <-> ~[alpha]~p"),
    ("?", "<p?>q <-> p & q"),
    ("T1", "<alpha & p?>q <-> <alpha^>(p & q)"),
    (";", "[alpha;beta]p <-> [alpha][beta]p"),
    ("D", "<alpha + beta>p <-> <alpha>p | <beta>p"),
    ("K", "[alpha](p -> q) -> [alpha]p -> [alpha]q"),
    ("C1", "<alpha^>p & <beta^>q -> <(alpha;beta)^>(p & q)"),
    ("C2", "[alpha^]p & [beta^]p -> [alpha^;beta^]p"),
    ("C3", "<alpha^>p & [alpha^]q -> p & q"),
    ("V", "<alpha;(p | q)?;beta>r <-> <alpha;p?;beta>r | <alpha;q?;beta>r"),
];

const PROGRAM_SCHEMES: &[(&str, &str)] = &[
    ("Wk", "alpha & beta => alpha"),
    ("Cm", "alpha & beta <=> beta & alpha"),
    ("Ct", "alpha & alpha <=> alpha"),
    ("D3", "(alpha + beta);gamma <=> alpha;gamma + beta;gamma"),
    ("D4", "alpha;(beta + gamma) <=> alpha;beta + alpha;gamma"),
    ("T", "alpha & p? <=> (<alpha^>p)?"),
    ("A", "alpha & (beta & gamma) <=> (alpha & beta) & gamma"),
    ("T2", "(alpha;p?) & beta <=> (alpha & beta);p?"),
    ("T3", "(p?;alpha) & beta <=> p?;(alpha & beta)"),
    ("D1", "alpha & (beta + gamma) <=> alpha & beta + alpha & gamma"),
    ("D2", "alpha + beta & gamma <=> (alpha + beta) & (alpha + gamma)"),
];

const TP_TEXT: &str = "(phi <-> psi) <-> (phi? <=> psi?)";
const C_TEXT: &str = "alpha^ => alpha[beta2;beta3;[(beta1;beta2;beta3)^]p? / beta2;[(beta3;beta1;beta2)^]p?;beta3]^";

/// All schemes in matching order: formula axioms, then program axioms,
/// then `TP` and `C`.
pub fn schemes() -> &'static [Scheme] {
    static ALL: OnceLock<Vec<Scheme>> = OnceLock::new();
    ALL.get_or_init(|| {
        let mut out: Vec<Scheme> = FORMULA_SCHEMES
            .iter()
            .chain(PROGRAM_SCHEMES)
            .map(|&(name, text)| Scheme::custom(name, text).expect("scheme parses"))
            .collect();
        out.push(Scheme {
            name: "TP",
            text: TP_TEXT,
            body: SchemeBody::TestProgram,
            formula_vars: ["phi", "psi"].iter().map(|s| s.to_string()).collect(),
            program_vars: BTreeSet::new(),
        });
        out.push(Scheme {
            name: "C",
            text: C_TEXT,
            body: SchemeBody::CycleTransfer,
            formula_vars: ["p"].iter().map(|s| s.to_string()).collect(),
            program_vars: ["alpha", "beta1", "beta2", "beta3"].iter().map(|s| s.to_string()).collect(),
        });
        out
    })
}

pub fn scheme(name: &str) -> Option<&'static Scheme> {
    schemes().iter().find(|s| s.name == name)
}

/// First formula scheme matching `f`, with the binding found.
pub fn is_axiom_instance(f: &Formula) -> Option<(&'static str, Binding)> {
    schemes().iter().find_map(|s| match &s.body {
        SchemeBody::Formula(pat) => {
            let mut b = Binding::new();
            match_f(pat, f, &mut b).then_some((s.name, b))
        }
        _ => None,
    })
}

/// First program scheme of the same judgement kind matching `j`. Rule `C`
/// needs an explicit binding and is not tried here.
pub fn is_program_axiom_instance(j: &Judgement) -> Option<(&'static str, Binding)> {
    schemes().iter().find_map(|s| match &s.body {
        SchemeBody::Judgement(pat) if pat.kind == j.kind => {
            let mut b = Binding::new();
            (match_p(&pat.left, &j.left, &mut b) && match_p(&pat.right, &j.right, &mut b)).then_some((s.name, b))
        }
        _ => None,
    })
}

/// Match `f` against the pattern of the named formula scheme.
pub fn match_formula_scheme(name: &str, f: &Formula) -> Option<Binding> {
    match &scheme(name)?.body {
        SchemeBody::Formula(pat) => {
            let mut b = Binding::new();
            match_f(pat, f, &mut b).then_some(b)
        }
        _ => None,
    }
}

pub fn match_program_scheme(name: &str, j: &Judgement) -> Option<Binding> {
    match &scheme(name)?.body {
        SchemeBody::Judgement(pat) if pat.kind == j.kind => {
            let mut b = Binding::new();
            (match_p(&pat.left, &j.left, &mut b) && match_p(&pat.right, &j.right, &mut b)).then_some(b)
        }
        _ => None,
    }
}

fn match_f(pat: &Formula, f: &Formula, b: &mut Binding) -> bool {
    match (pat, f) {
        (Formula::Prop(x), _) => match b.formulas.get(x) {
            Some(bound) => bound == f,
            None => {
                b.formulas.insert(x.clone(), f.clone());
                true
            }
        },
        (Formula::True, Formula::True) => true,
        (Formula::Not(p), Formula::Not(g)) => match_f(p, g, b),
        (Formula::Or(p1, p2), Formula::Or(g1, g2)) => match_f(p1, g1, b) && match_f(p2, g2, b),
        (Formula::Diamond(pp, pf), Formula::Diamond(gp, gf)) => match_p(pp, gp, b) && match_f(pf, gf, b),
        _ => false,
    }
}

fn match_p(pat: &Program, p: &Program, b: &mut Binding) -> bool {
    match (pat, p) {
        (Program::Atomic(x), _) => match b.programs.get(x) {
            Some(bound) => bound == p,
            None => {
                b.programs.insert(x.clone(), p.clone());
                true
            }
        },
        (Program::Seq(a1, a2), Program::Seq(b1, b2))
        | (Program::Union(a1, a2), Program::Union(b1, b2))
        | (Program::Inter(a1, a2), Program::Inter(b1, b2)) => match_p(a1, b1, b) && match_p(a2, b2, b),
        (Program::Test(f), Program::Test(g)) => match_f(f, g, b),
        _ => false,
    }
}

fn inst_f(pat: &Formula, b: &Binding) -> Option<Formula> {
    Some(match pat {
        Formula::Prop(x) => b.formulas.get(x)?.clone(),
        Formula::True => Formula::True,
        Formula::Not(g) => Formula::not(inst_f(g, b)?),
        Formula::Or(l, r) => Formula::or(inst_f(l, b)?, inst_f(r, b)?),
        Formula::Diamond(p, g) => Formula::diamond(inst_p(p, b)?, inst_f(g, b)?),
    })
}

fn inst_p(pat: &Program, b: &Binding) -> Option<Program> {
    Some(match pat {
        Program::Atomic(x) => b.programs.get(x)?.clone(),
        Program::Seq(l, r) => Program::seq(inst_p(l, b)?, inst_p(r, b)?),
        Program::Union(l, r) => Program::union(inst_p(l, b)?, inst_p(r, b)?),
        Program::Inter(l, r) => Program::inter(inst_p(l, b)?, inst_p(r, b)?),
        Program::Test(f) => Program::test(inst_f(f, b)?),
    })
}

/// Which occurrences of the rule-`C` pattern are rewritten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Occurrences {
    #[default]
    All,
    /// Exactly one occurrence (any one) is rewritten.
    One,
}

/// Sequence of the given factors; a `true?` in the first-cycle position
/// (`beta1`) is dropped so an empty prefix does not leave a `true?` factor.
fn cycle_seq(items: [&Program; 3], beta1_at: usize) -> Program {
    Program::seq_all(
        items
            .iter()
            .enumerate()
            .filter(|(i, p)| !(*i == beta1_at && p.is_skip()))
            .map(|(_, p)| (*p).clone()),
    )
}

/// `(pattern, replacement)` of rule `C`:
/// `beta2;[(beta3;beta1;beta2)^]p?;beta3` and `beta2;beta3;[(beta1;beta2;beta3)^]p?`.
pub fn rule_c_pattern(beta1: &Program, beta2: &Program, beta3: &Program, p: &Formula) -> (Program, Program) {
    let inner_old = Program::loop_of(cycle_seq([beta3, beta1, beta2], 1));
    let inner_new = Program::loop_of(cycle_seq([beta1, beta2, beta3], 0));
    let old = Program::seq_all([
        beta2.clone(),
        Program::test(Formula::boxed(inner_old, p.clone())),
        beta3.clone(),
    ]);
    let new = Program::seq_all([
        beta2.clone(),
        beta3.clone(),
        Program::test(Formula::boxed(inner_new, p.clone())),
    ]);
    (old, new)
}

/// The rule-`C` judgement for the given host and parameters.
pub fn rule_c_judgement(
    host: &Program,
    beta1: &Program,
    beta2: &Program,
    beta3: &Program,
    p: &Formula,
    mode: Occurrences,
) -> Result<Judgement, String> {
    let (old, new) = rule_c_pattern(beta1, beta2, beta3, p);
    let n = count_occurrences(host, &old);
    if n == 0 {
        return Err("pattern does not occur in the host program".into());
    }
    let rewritten = match mode {
        Occurrences::All => replace_all(host, &old, &new),
        Occurrences::One => replace_nth(host, &old, &new, &mut 0).expect("occurrence exists"),
    };
    Ok(Judgement::new(
        JudgementKind::Implies,
        Program::loop_of(host.clone()),
        Program::loop_of(rewritten),
    ))
}

/// Check a judgement against rule `C` with the given parameters. With
/// `Occurrences::One` any single rewritten occurrence is accepted.
pub fn check_rule_c(
    j: &Judgement,
    beta1: &Program,
    beta2: &Program,
    beta3: &Program,
    p: &Formula,
    host: &Program,
    mode: Occurrences,
) -> Result<(), String> {
    if j.kind != JudgementKind::Implies {
        return Err("rule C concludes an inclusion".into());
    }
    if j.left != Program::loop_of(host.clone()) {
        return Err("left side is not the loop of the host program".into());
    }
    let (old, new) = rule_c_pattern(beta1, beta2, beta3, p);
    let n = count_occurrences(host, &old);
    if n == 0 {
        return Err("pattern does not occur in the host program".into());
    }
    let ok = match mode {
        Occurrences::All => j.right == Program::loop_of(replace_all(host, &old, &new)),
        Occurrences::One => (0..n).any(|i| {
            let mut k = i;
            replace_nth(host, &old, &new, &mut k).map(Program::loop_of).as_ref() == Some(&j.right)
        }),
    };
    if ok {
        Ok(())
    } else {
        Err("right side is not the loop of the host with the pattern rewritten".into())
    }
}

/// Occurrences of `old` in `p`, outermost first; nested matches inside a
/// match are not counted. Tests are searched too.
pub fn count_occurrences(p: &Program, old: &Program) -> usize {
    if p == old {
        return 1;
    }
    match p {
        Program::Atomic(_) => 0,
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            count_occurrences(a, old) + count_occurrences(b, old)
        }
        Program::Test(f) => count_in_formula(f, old),
    }
}

fn count_in_formula(f: &Formula, old: &Program) -> usize {
    match f {
        Formula::True | Formula::Prop(_) => 0,
        Formula::Not(g) => count_in_formula(g, old),
        Formula::Or(a, b) => count_in_formula(a, old) + count_in_formula(b, old),
        Formula::Diamond(p, g) => count_occurrences(p, old) + count_in_formula(g, old),
    }
}

pub fn replace_all(p: &Program, old: &Program, new: &Program) -> Program {
    if p == old {
        return new.clone();
    }
    match p {
        Program::Atomic(_) => p.clone(),
        Program::Seq(a, b) => Program::seq(replace_all(a, old, new), replace_all(b, old, new)),
        Program::Union(a, b) => Program::union(replace_all(a, old, new), replace_all(b, old, new)),
        Program::Inter(a, b) => Program::inter(replace_all(a, old, new), replace_all(b, old, new)),
        Program::Test(f) => Program::test(replace_all_f(f, old, new)),
    }
}

fn replace_all_f(f: &Formula, old: &Program, new: &Program) -> Formula {
    match f {
        Formula::True | Formula::Prop(_) => f.clone(),
        Formula::Not(g) => Formula::not(replace_all_f(g, old, new)),
        Formula::Or(a, b) => Formula::or(replace_all_f(a, old, new), replace_all_f(b, old, new)),
        Formula::Diamond(p, g) => Formula::diamond(replace_all(p, old, new), replace_all_f(g, old, new)),
    }
}

/// Replace the `k`-th occurrence (0-based, same order as
/// `count_occurrences`). `k` is decremented past earlier occurrences.
fn replace_nth(p: &Program, old: &Program, new: &Program, k: &mut usize) -> Option<Program> {
    if p == old {
        if *k == 0 {
            return Some(new.clone());
        }
        *k -= 1;
        return None;
    }
    match p {
        Program::Atomic(_) => None,
        Program::Seq(a, b) | Program::Union(a, b) | Program::Inter(a, b) => {
            if let Some(x) = replace_nth(a, old, new, k) {
                return Some(rebuild(p, x, (**b).clone()));
            }
            replace_nth(b, old, new, k).map(|y| rebuild(p, (**a).clone(), y))
        }
        Program::Test(f) => replace_nth_f(f, old, new, k).map(Program::test),
    }
}

fn replace_nth_f(f: &Formula, old: &Program, new: &Program, k: &mut usize) -> Option<Formula> {
    match f {
        Formula::True | Formula::Prop(_) => None,
        Formula::Not(g) => replace_nth_f(g, old, new, k).map(Formula::not),
        Formula::Or(a, b) => {
            if let Some(x) = replace_nth_f(a, old, new, k) {
                return Some(Formula::or(x, (**b).clone()));
            }
            replace_nth_f(b, old, new, k).map(|y| Formula::or((**a).clone(), y))
        }
        Formula::Diamond(p, g) => {
            if let Some(x) = replace_nth(p, old, new, k) {
                return Some(Formula::diamond(x, (**g).clone()));
            }
            replace_nth_f(g, old, new, k).map(|y| Formula::diamond((**p).clone(), y))
        }
    }
}

fn rebuild(p: &Program, a: Program, b: Program) -> Program {
    match p {
        Program::Seq(..) => Program::seq(a, b),
        Program::Union(..) => Program::union(a, b),
        Program::Inter(..) => Program::inter(a, b),
        _ => unreachable!("binary program"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program};

    fn prog(s: &str) -> Program {
        parse_program(s).unwrap()
    }

    #[test]
    fn scheme_table() {
        let names: Vec<&str> = schemes().iter().map(|s| s.name).collect();
        assert_eq!(names.len(), 23);
        assert_eq!(&names[..3], &["Dl", "?", "T1"]);
        assert_eq!(names.last(), Some(&"C"));
        assert!(scheme("K").unwrap().formula_vars.contains("q"));
        assert!(scheme("D3").unwrap().program_vars.contains("gamma"));
    }

    #[test]
    fn formula_instances() {
        let (name, b) = is_axiom_instance(&parse("<a & p?>q <-> <a & true?>(p & q)").unwrap()).unwrap();
        assert_eq!(name, "T1");
        assert_eq!(b.programs["alpha"], prog("a"));
        assert_eq!(b.formulas["p"], parse("p").unwrap());
        let (name, _) = is_axiom_instance(&parse("[a](p -> q) -> [a]p -> [a]q").unwrap()).unwrap();
        assert_eq!(name, "K");
        assert!(is_axiom_instance(&parse("<a>p <-> <a>p").unwrap()).is_none());
        // a metavariable bound twice must agree
        assert!(is_axiom_instance(&parse("<a^>p & [b^]q -> p & q").unwrap()).is_none());
    }

    #[test]
    fn program_instances() {
        let j = parse_judgement("a & b => a").unwrap();
        assert_eq!(is_program_axiom_instance(&j).unwrap().0, "Wk");
        let j = parse_judgement("a & p? <=> (<a^>p)?").unwrap();
        assert_eq!(is_program_axiom_instance(&j).unwrap().0, "T");
        assert!(is_program_axiom_instance(&parse_judgement("a => a & a").unwrap()).is_none());
        // kinds must agree
        assert!(is_program_axiom_instance(&parse_judgement("a & b => b & a").unwrap()).is_none());
    }

    #[test]
    fn instantiate_round_trip() {
        let s = scheme("V").unwrap();
        let b = Binding::new()
            .program("alpha", prog("a"))
            .program("beta", prog("b;c"))
            .formula("p", parse("p").unwrap())
            .formula("q", parse("<a>q").unwrap())
            .formula("r", parse("r").unwrap());
        let Some(Instance::Formula(f)) = s.instantiate(&b) else { panic!() };
        assert_eq!(match_formula_scheme("V", &f), Some(b));
    }

    #[test]
    fn rule_c_worked_instance() {
        let host = prog("a;[(b;a)^]false?;b");
        let j = parse_judgement("(a;[(b;a)^]false?;b)^ => (a;b;[(a;b)^]false?)^").unwrap();
        let (skip, a, b, f) = (Program::skip(), prog("a"), prog("b"), Formula::bot());
        assert_eq!(check_rule_c(&j, &skip, &a, &b, &f, &host, Occurrences::All), Ok(()));
        assert_eq!(rule_c_judgement(&host, &skip, &a, &b, &f, Occurrences::All).unwrap(), j);
    }

    #[test]
    fn rule_c_needs_an_occurrence() {
        let host = prog("a;b");
        let j = parse_judgement("(a;b)^ => (a;b)^").unwrap();
        let r = check_rule_c(&j, &Program::skip(), &prog("a"), &prog("b"), &Formula::bot(), &host, Occurrences::All);
        assert!(r.unwrap_err().contains("does not occur"));
    }

    #[test]
    fn rule_c_rewrites_every_occurrence() {
        let (b1, b2, b3, p) = (prog("c"), prog("a"), prog("b"), parse("q").unwrap());
        let (old, new) = rule_c_pattern(&b1, &b2, &b3, &p);
        let host = Program::union(Program::seq(old.clone(), prog("d")), Program::inter(prog("e"), old.clone()));
        assert_eq!(count_occurrences(&host, &old), 2);
        let all = rule_c_judgement(&host, &b1, &b2, &b3, &p, Occurrences::All).unwrap();
        let want = Program::union(Program::seq(new.clone(), prog("d")), Program::inter(prog("e"), new.clone()));
        assert_eq!(all.right, Program::loop_of(want));
        let one_a = Judgement::new(
            JudgementKind::Implies,
            Program::loop_of(host.clone()),
            Program::loop_of(Program::union(Program::seq(old.clone(), prog("d")), Program::inter(prog("e"), new.clone()))),
        );
        assert!(check_rule_c(&one_a, &b1, &b2, &b3, &p, &host, Occurrences::One).is_ok());
        assert!(check_rule_c(&one_a, &b1, &b2, &b3, &p, &host, Occurrences::All).is_err());
        assert!(check_rule_c(&all, &b1, &b2, &b3, &p, &host, Occurrences::One).is_err());
    }
}
