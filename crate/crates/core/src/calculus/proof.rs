use std::collections::HashMap;
use std::fmt;

use super::schemes::{check_rule_c, match_formula_scheme, match_program_scheme, scheme, Binding, Instance, Occurrences, SchemeBody};
use super::taut::{is_tautology, propositional_atoms};
use super::ProofError;
use crate::syntax::{parse, parse_judgement, psub, render, usub, Formula, Judgement, JudgementKind, Program, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    Formula(Formula),
    Judgement(Judgement),
}

impl Statement {
    /// Judgements are recognised by `=>` / `<=>`; anything else is a formula.
    pub fn parse(text: &str) -> Result<Statement, SyntaxError> {
        if text.contains("=>") || text.contains('⇒') || text.contains('⇔') {
            parse_judgement(text).map(Statement::Judgement)
        } else {
            parse(text).map(Statement::Formula)
        }
    }

    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Statement::Formula(f) => Some(f),
            Statement::Judgement(_) => None,
        }
    }

    pub fn as_judgement(&self) -> Option<&Judgement> {
        match self {
            Statement::Judgement(j) => Some(j),
            Statement::Formula(_) => None,
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Formula(x) => write!(f, "{x}"),
            Statement::Judgement(j) => write!(f, "{j}"),
        }
    }
}

/// Structural rules for program judgements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructKind {
    Refl,
    Trans,
    CongSeqL,
    CongSeqR,
    CongInterL,
    CongInterR,
    CongUnionL,
    CongUnionR,
    SymIff,
    SplitIff,
}

impl StructKind {
    pub const ALL: [StructKind; 10] = [
        StructKind::Refl,
        StructKind::Trans,
        StructKind::CongSeqL,
        StructKind::CongSeqR,
        StructKind::CongInterL,
        StructKind::CongInterR,
        StructKind::CongUnionL,
        StructKind::CongUnionR,
        StructKind::SymIff,
        StructKind::SplitIff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructKind::Refl => "Refl",
            StructKind::Trans => "Trans",
            StructKind::CongSeqL => "CongSeqL",
            StructKind::CongSeqR => "CongSeqR",
            StructKind::CongInterL => "CongInterL",
            StructKind::CongInterR => "CongInterR",
            StructKind::CongUnionL => "CongUnionL",
            StructKind::CongUnionR => "CongUnionR",
            StructKind::SymIff => "SymIff",
            StructKind::SplitIff => "SplitIff",
        }
    }

    pub fn from_name(s: &str) -> Option<StructKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    /// Propositional tautology. The optional certificate lists the atoms of
    /// the truth table; it must agree with the atoms the checker finds.
    Taut { atoms: Option<Vec<Formula>> },
    AxiomFormula { name: String, binding: Option<Binding> },
    AxiomProgram { name: String, binding: Option<Binding>, occurrences: Occurrences },
    MP(usize, usize),
    Gen { line: usize, program: Option<Program> },
    USub { line: usize, prop: String, formula: Formula },
    PSub { line: usize, judgement: usize },
    /// `TP` in either direction between `phi <-> psi` and `phi? <=> psi?`.
    TestProgram(usize),
    Struct { kind: StructKind, refs: Vec<usize> },
}

impl Justification {
    /// Line ids this justification depends on.
    pub fn refs(&self) -> Vec<usize> {
        match self {
            Justification::Taut { .. } | Justification::AxiomFormula { .. } | Justification::AxiomProgram { .. } => vec![],
            Justification::MP(i, j) => vec![*i, *j],
            Justification::Gen { line, .. } | Justification::USub { line, .. } => vec![*line],
            Justification::PSub { line, judgement } => vec![*line, *judgement],
            Justification::TestProgram(i) => vec![*i],
            Justification::Struct { refs, .. } => refs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub id: usize,
    pub statement: Statement,
    pub justification: Justification,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

impl Proof {
    pub fn last_formula(&self) -> Option<&Formula> {
        self.lines.last().and_then(|l| l.statement.as_formula())
    }
}

/// Check every line in order; the first unjustified line is reported.
pub fn check_proof(p: &Proof) -> Result<(), ProofError> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (idx, line) in p.lines.iter().enumerate() {
        let fail = |reason: String| ProofError::Line { id: line.id, reason };
        if seen.contains_key(&line.id) {
            return Err(fail("duplicate line id".into()));
        }
        let mut premises = Vec::new();
        for r in line.justification.refs() {
            match seen.get(&r) {
                Some(&i) => premises.push(&p.lines[i].statement),
                None => return Err(fail(format!("reference {r} is not an earlier line"))),
            }
        }
        check_line(&line.statement, &line.justification, &premises).map_err(fail)?;
        seen.insert(line.id, idx);
    }
    Ok(())
}

fn want_formula<'a>(s: &'a Statement, what: &str) -> Result<&'a Formula, String> {
    s.as_formula().ok_or_else(|| format!("{what} must be a formula"))
}

fn want_judgement<'a>(s: &'a Statement, what: &str) -> Result<&'a Judgement, String> {
    s.as_judgement().ok_or_else(|| format!("{what} must be a program judgement"))
}

/// A conclusion of kind `concl` may follow from premises of kind `prem`.
fn kind_follows(concl: JudgementKind, prem: JudgementKind) -> bool {
    concl == JudgementKind::Implies || prem == JudgementKind::Equiv
}

fn check_line(stmt: &Statement, just: &Justification, prem: &[&Statement]) -> Result<(), String> {
    match just {
        Justification::Taut { atoms } => {
            let f = want_formula(stmt, "a tautology")?;
            if let Some(cert) = atoms {
                let mut found = propositional_atoms(f);
                let mut given = cert.clone();
                found.sort();
                given.sort();
                given.dedup();
                if found != given {
                    return Err("certificate atoms differ from the formula's atoms".into());
                }
            }
            if is_tautology(f)? {
                Ok(())
            } else {
                Err("not a propositional tautology".into())
            }
        }
        Justification::AxiomFormula { name, binding } => {
            let f = want_formula(stmt, "a formula axiom")?;
            let s = scheme(name).ok_or_else(|| format!("unknown axiom {name}"))?;
            if !matches!(s.body, SchemeBody::Formula(_)) {
                return Err(format!("{name} is not a formula axiom"));
            }
            match binding {
                Some(b) => check_binding(s, b, &Statement::Formula(f.clone())),
                None => match_formula_scheme(name, f)
                    .map(|_| ())
                    .ok_or_else(|| format!("not an instance of ({name})")),
            }
        }
        Justification::AxiomProgram { name, binding, occurrences } => {
            let j = want_judgement(stmt, "a program axiom")?;
            let s = scheme(name).ok_or_else(|| format!("unknown axiom {name}"))?;
            match &s.body {
                SchemeBody::Judgement(_) => match binding {
                    Some(b) => check_binding(s, b, stmt),
                    None => match_program_scheme(name, j)
                        .map(|_| ())
                        .ok_or_else(|| format!("not an instance of ({name})")),
                },
                SchemeBody::CycleTransfer => {
                    let b = binding.as_ref().ok_or("rule C needs a binding")?;
                    check_vars(s, b)?;
                    let prog = |n: &str| b.programs.get(n).ok_or(format!("binding lacks {n}"));
                    let p = b.formulas.get("p").ok_or("binding lacks p")?;
                    check_rule_c(j, prog("beta1")?, prog("beta2")?, prog("beta3")?, p, prog("alpha")?, *occurrences)
                }
                SchemeBody::TestProgram => Err("TP is applied to a line, not used as an axiom".into()),
                SchemeBody::Formula(_) => Err(format!("{name} is a formula axiom")),
            }
        }
        Justification::MP(..) => {
            let f = want_formula(stmt, "an MP conclusion")?;
            let a = want_formula(prem[0], "an MP premise")?;
            let b = want_formula(prem[1], "an MP premise")?;
            let fits = |x: &Formula, imp: &Formula| imp.as_implies() == Some((x, f));
            if fits(a, b) || fits(b, a) {
                Ok(())
            } else {
                Err("premises are not phi and phi -> conclusion".into())
            }
        }
        Justification::Gen { program, .. } => {
            let f = want_formula(stmt, "a Gen conclusion")?;
            let prev = want_formula(prem[0], "the Gen premise")?;
            match f.as_box() {
                Some((a, g)) if g == prev && program.as_ref().is_none_or(|p| p == a) => Ok(()),
                _ => Err("conclusion is not [alpha] applied to the premise".into()),
            }
        }
        Justification::USub { prop, formula, .. } => {
            let f = want_formula(stmt, "a USub conclusion")?;
            let prev = want_formula(prem[0], "the USub premise")?;
            if &usub(prev, formula, prop) == f {
                Ok(())
            } else {
                Err(format!("conclusion is not the premise with {prop} replaced"))
            }
        }
        Justification::PSub { .. } => {
            let f = want_formula(stmt, "a PSub conclusion")?;
            let prev = want_formula(prem[0], "the PSub premise")?;
            let j = want_judgement(prem[1], "the PSub side premise")?;
            if j.kind != JudgementKind::Implies {
                return Err("PSub needs an inclusion alpha => alpha'".into());
            }
            if &psub(prev, &j.left, &j.right) == f {
                Ok(())
            } else {
                Err("conclusion is not the premise with positive diamonds rewritten".into())
            }
        }
        Justification::TestProgram(_) => match (stmt, prem[0]) {
            (Statement::Judgement(j), Statement::Formula(f)) => {
                let (phi, psi) = f.as_iff().ok_or("premise is not a biconditional")?;
                let want = Judgement::new(JudgementKind::Equiv, Program::test(phi.clone()), Program::test(psi.clone()));
                if *j == want {
                    Ok(())
                } else {
                    Err("conclusion is not phi? <=> psi?".into())
                }
            }
            (Statement::Formula(f), Statement::Judgement(j)) => match (&j.kind, &j.left, &j.right) {
                (JudgementKind::Equiv, Program::Test(phi), Program::Test(psi))
                    if *f == Formula::iff((**phi).clone(), (**psi).clone()) =>
                {
                    Ok(())
                }
                _ => Err("premise is not phi? <=> psi? for the concluded biconditional".into()),
            },
            _ => Err("TP relates a formula line and a judgement line".into()),
        },
        Justification::Struct { kind, refs } => {
            let j = want_judgement(stmt, "a structural conclusion")?;
            check_struct(*kind, j, prem, refs.len())
        }
    }
}

fn check_vars(s: &super::schemes::Scheme, b: &Binding) -> Result<(), String> {
    let fk: Vec<&String> = b.formulas.keys().collect();
    let pk: Vec<&String> = b.programs.keys().collect();
    if fk != s.formula_vars.iter().collect::<Vec<_>>() || pk != s.program_vars.iter().collect::<Vec<_>>() {
        return Err(format!("binding does not cover exactly the metavariables of ({})", s.name));
    }
    Ok(())
}

fn check_binding(s: &super::schemes::Scheme, b: &Binding, stmt: &Statement) -> Result<(), String> {
    check_vars(s, b)?;
    let inst = s.instantiate(b).ok_or("binding leaves a metavariable unbound")?;
    let same = match (inst, stmt) {
        (Instance::Formula(g), Statement::Formula(f)) => &g == f,
        (Instance::Judgement(g), Statement::Judgement(j)) => &g == j,
        _ => false,
    };
    if same {
        Ok(())
    } else {
        Err(format!("statement is not ({}) under the given binding", s.name))
    }
}

fn check_struct(kind: StructKind, j: &Judgement, prem: &[&Statement], nrefs: usize) -> Result<(), String> {
    let arity = match kind {
        StructKind::Refl => 0,
        StructKind::Trans => 2,
        _ => 1,
    };
    if nrefs != arity {
        return Err(format!("{} takes {arity} reference(s)", kind.name()));
    }
    let ps: Vec<&Judgement> = prem
        .iter()
        .map(|s| want_judgement(s, "a structural premise"))
        .collect::<Result<_, _>>()?;
    let ok = match kind {
        StructKind::Refl => j.left == j.right,
        StructKind::Trans => {
            let (a, b) = (ps[0], ps[1]);
            a.right == b.left
                && j.left == a.left
                && j.right == b.right
                && kind_follows(j.kind, a.kind)
                && kind_follows(j.kind, b.kind)
        }
        StructKind::SymIff => {
            let a = ps[0];
            a.kind == JudgementKind::Equiv && j.kind == JudgementKind::Equiv && j.left == a.right && j.right == a.left
        }
        StructKind::SplitIff => {
            let a = ps[0];
            a.kind == JudgementKind::Equiv
                && j.kind == JudgementKind::Implies
                && ((j.left == a.left && j.right == a.right) || (j.left == a.right && j.right == a.left))
        }
        _ => {
            let a = ps[0];
            let ctx = |x: &Program, y: &Program| -> Option<(Program, Program)> {
                match (kind, x, y) {
                    (StructKind::CongSeqL, Program::Seq(l1, r1), Program::Seq(l2, r2)) if r1 == r2 => Some(((**l1).clone(), (**l2).clone())),
                    (StructKind::CongSeqR, Program::Seq(l1, r1), Program::Seq(l2, r2)) if l1 == l2 => Some(((**r1).clone(), (**r2).clone())),
                    (StructKind::CongInterL, Program::Inter(l1, r1), Program::Inter(l2, r2)) if r1 == r2 => Some(((**l1).clone(), (**l2).clone())),
                    (StructKind::CongInterR, Program::Inter(l1, r1), Program::Inter(l2, r2)) if l1 == l2 => Some(((**r1).clone(), (**r2).clone())),
                    (StructKind::CongUnionL, Program::Union(l1, r1), Program::Union(l2, r2)) if r1 == r2 => Some(((**l1).clone(), (**l2).clone())),
                    (StructKind::CongUnionR, Program::Union(l1, r1), Program::Union(l2, r2)) if l1 == l2 => Some(((**r1).clone(), (**r2).clone())),
                    _ => None,
                }
            };
            match ctx(&j.left, &j.right) {
                Some((x, y)) => x == a.left && y == a.right && kind_follows(j.kind, a.kind),
                None => false,
            }
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{} does not apply to the premises", kind.name()))
    }
}

/// Render a binding as `name := term` pairs, for diagnostics.
pub fn show_binding(b: &Binding) -> String {
    let mut parts: Vec<String> = b.formulas.iter().map(|(k, v)| format!("{k} := {}", render(v))).collect();
    parts.extend(b.programs.iter().map(|(k, v)| format!("{k} := {}", crate::syntax::render_program(v))));
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::super::{proof_from_json, proof_to_json, theory_derives, Theory};
    use super::*;

    const FIXTURE: &str = include_str!("../../fixtures/cyclic_refutation.json");

    fn line(id: usize, s: &str, j: Justification) -> ProofLine {
        ProofLine {
            id,
            statement: Statement::parse(s).unwrap(),
            justification: j,
        }
    }

    fn axiom(name: &str) -> Justification {
        Justification::AxiomFormula {
            name: name.into(),
            binding: None,
        }
    }

    fn taut() -> Justification {
        Justification::Taut { atoms: None }
    }

    fn test_proof() -> Proof {
        Proof {
            lines: vec![
                line(1, "<p?>q <-> p & q", axiom("?")),
                line(2, "(<p?>q <-> p & q) -> <p?>q -> p", taut()),
                line(3, "<p?>q -> p", Justification::MP(1, 2)),
            ],
        }
    }

    #[test]
    fn three_line_proof() {
        assert_eq!(check_proof(&test_proof()), Ok(()));
    }

    #[test]
    fn wrong_mp_fails() {
        let mut p = test_proof();
        p.lines[2].statement = Statement::parse("<p?>q -> q").unwrap();
        assert_eq!(check_proof(&p).unwrap_err().line_id(), Some(3));
        let mut p = test_proof();
        p.lines[2].justification = Justification::MP(1, 1);
        assert_eq!(check_proof(&p).unwrap_err().line_id(), Some(3));
    }

    #[test]
    fn forward_references_rejected() {
        let mut p = test_proof();
        p.lines[2].justification = Justification::MP(1, 4);
        assert!(check_proof(&p).unwrap_err().to_string().contains("not an earlier line"));
    }

    #[test]
    fn refutation_fixture_checks() {
        let p = proof_from_json(FIXTURE).unwrap();
        assert_eq!(check_proof(&p), Ok(()));
        let last = p.last_formula().unwrap();
        assert_eq!(*last, parse("~<(a;[(b;a)^]false?;b)^>true").unwrap());
        let again = proof_from_value_rt(&p);
        assert_eq!(again, p);
    }

    fn proof_from_value_rt(p: &Proof) -> Proof {
        super::super::proof_from_value(&proof_to_json(p)).unwrap()
    }

    #[test]
    fn corrupted_binding_fails_at_its_line() {
        let mut p = proof_from_json(FIXTURE).unwrap();
        let Justification::AxiomFormula { binding: Some(b), .. } = &mut p.lines[18].justification else {
            panic!("line 19 carries a binding")
        };
        b.formulas.insert("q".into(), Formula::bot());
        assert_eq!(check_proof(&p).unwrap_err().line_id(), Some(19));
    }

    #[test]
    fn taut_certificate() {
        let f = "p & q -> p";
        let good = line(1, f, Justification::Taut { atoms: Some(vec![parse("p").unwrap(), parse("q").unwrap()]) });
        assert!(check_proof(&Proof { lines: vec![good] }).is_ok());
        let bad = line(1, f, Justification::Taut { atoms: Some(vec![parse("p").unwrap()]) });
        assert!(check_proof(&Proof { lines: vec![bad] }).is_err());
    }

    #[test]
    fn gen_usub_psub_tp() {
        let p = Proof {
            lines: vec![
                line(1, "p | ~p", taut()),
                line(2, "[a](p | ~p)", Justification::Gen { line: 1, program: None }),
                line(3, "[a](<b>q | ~<b>q)", Justification::USub { line: 2, prop: "p".into(), formula: parse("<b>q").unwrap() }),
                line(4, "a & c => a", Justification::AxiomProgram { name: "Wk".into(), binding: None, occurrences: Occurrences::All }),
                line(5, "<a & c>p -> <a & c>p", taut()),
                line(6, "<a & c>p -> <a>p", Justification::PSub { line: 5, judgement: 4 }),
                line(7, "p <-> ~~p", taut()),
                line(8, "p? <=> (~~p)?", Justification::TestProgram(7)),
                line(9, "p <-> ~~p", Justification::TestProgram(8)),
            ],
        };
        assert_eq!(check_proof(&p), Ok(()));
    }

    #[test]
    fn structural_rules() {
        let wk = || Justification::AxiomProgram { name: "Cm".into(), binding: None, occurrences: Occurrences::All };
        let s = |kind, refs: &[usize]| Justification::Struct { kind, refs: refs.to_vec() };
        let p = Proof {
            lines: vec![
                line(1, "a & b <=> b & a", wk()),
                line(2, "b & a <=> a & b", s(StructKind::SymIff, &[1])),
                line(3, "a & b => b & a", s(StructKind::SplitIff, &[1])),
                line(4, "(a & b);c => (b & a);c", s(StructKind::CongSeqL, &[3])),
                line(5, "c;(a & b) <=> c;(b & a)", s(StructKind::CongSeqR, &[1])),
                line(6, "(a & b) + d => (b & a) + d", s(StructKind::CongUnionL, &[3])),
                line(7, "d & (a & b) => d & (b & a)", s(StructKind::CongInterR, &[3])),
                line(8, "a & b <=> a & b", s(StructKind::Trans, &[1, 2])),
                line(9, "a => a", s(StructKind::Refl, &[])),
            ],
        };
        assert_eq!(check_proof(&p), Ok(()));
        let mut bad = p.clone();
        bad.lines[4].statement = Statement::parse("c;(a & b) <=> c;(b & a);c").unwrap();
        assert_eq!(check_proof(&bad).unwrap_err().line_id(), Some(5));
        let mut weak = p.clone();
        weak.lines[3].justification = s(StructKind::CongSeqL, &[3]);
        weak.lines[3].statement = Statement::parse("(a & b);c <=> (b & a);c").unwrap();
        assert_eq!(check_proof(&weak).unwrap_err().line_id(), Some(4));
    }

    #[test]
    fn theory_derivations() {
        let p = |s: &str| parse(s).unwrap();
        let pp = Proof { lines: vec![line(1, "p -> p", taut())] };
        assert_eq!(theory_derives(&Theory::new([p("p")]), &p("p"), &pp), Ok(true));
        let mp = Proof { lines: vec![line(1, "p & (p -> q) -> q", taut())] };
        assert_eq!(theory_derives(&Theory::new([p("p"), p("p -> q")]), &p("q"), &mp), Ok(true));
        assert_eq!(theory_derives(&Theory::new([p("p")]), &p("q"), &mp), Ok(false));
        let dl = Proof { lines: vec![line(1, "<a>p <-> ~[a]~p", axiom("Dl"))] };
        assert_eq!(theory_derives(&Theory::default(), &p("<a>p <-> ~[a]~p"), &dl), Ok(true));
        assert!(theory_derives(&Theory::default(), &p("q"), &dl).is_err());
    }
}
