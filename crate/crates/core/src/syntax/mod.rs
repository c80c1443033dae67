//! Two-sorted syntax: formulas and programs, the ASCII grammar, printing and
//! the two substitution operators.
//!
//! Grammar (loosest binding first):
//!
//! ```text
//! formula  := imp ("<->" formula)?
//! imp      := or ("->" imp)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "~" unary | "<" program ">" unary | "[" program "]" unary
//!           | "true" | "false" | ident | "(" formula ")"
//! program  := inter ("+" inter)*
//! inter    := seq ("&" seq)*
//! seq      := post (";" post)*
//! post     := primary "^"*
//! primary  := ident | unary "?" | "(" program ")"
//! judgement:= program ("=>" | "<=>") program
//! ```

mod ast;
mod lexer;
mod parser;
mod render;
mod subst;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{Formula, Judgement, JudgementKind, Path, Polarity, Program, Term};
pub use render::RenderStyle;
pub use subst::{polarity_of_occurrences, psub, usub, usub_program};

pub const GRAMMAR: &str = "\
formula   := imp (\"<->\" formula)?            right-associative
imp       := or (\"->\" imp)?                  right-associative
or        := and (\"|\" and)*
and       := unary (\"&\" unary)*
unary     := \"~\" unary | \"<\" program \">\" unary | \"[\" program \"]\" unary
           | \"true\" | \"false\" | ident | \"(\" formula \")\"
program   := inter (\"+\" inter)*              union
inter     := seq (\"&\" seq)*                  intersection
seq       := post (\";\" post)*                composition
post      := primary \"^\"*                    a^ abbreviates (a & true?)
primary   := ident | unary \"?\" | \"(\" program \")\"
judgement := program (\"=>\" | \"<=>\") program
ident     := [a-z][a-z0-9_]*   (true, false reserved)
Unicode ¬ ∧ ∨ → ↔ ⟨ ⟩ ∩ ∪ ⊤ ⊥ ⇒ ⇔ ⟲ are accepted as aliases.
";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("unexpected character {found:?} at offset {pos}")]
    Lex { pos: usize, found: char },
    #[error("expected {expected} at offset {pos}, found {found}")]
    Parse {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown {sort} `{name}`")]
    UnknownIdentifier { sort: &'static str, name: String },
    #[error("`{0}` is used both as a proposition and as an atomic program")]
    SortClash(String),
}

/// Proposition and atomic-program names. The two sets are disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub props: BTreeSet<String>,
    pub programs: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new<P, A>(props: P, programs: A) -> Result<Self, SyntaxError>
    where
        P: IntoIterator,
        P::Item: Into<String>,
        A: IntoIterator,
        A::Item: Into<String>,
    {
        let v = Vocabulary {
            props: props.into_iter().map(Into::into).collect(),
            programs: programs.into_iter().map(Into::into).collect(),
        };
        v.check_disjoint()?;
        Ok(v)
    }

    pub fn check_disjoint(&self) -> Result<(), SyntaxError> {
        match self.props.intersection(&self.programs).next() {
            Some(name) => Err(SyntaxError::SortClash(name.clone())),
            None => Ok(()),
        }
    }

    pub fn union(&self, other: &Vocabulary) -> Vocabulary {
        Vocabulary {
            props: self.props.union(&other.props).cloned().collect(),
            programs: self.programs.union(&other.programs).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty() && self.programs.is_empty()
    }

    /// Errors if `used` mentions a symbol outside this vocabulary.
    pub fn admits(&self, used: &Vocabulary) -> Result<(), SyntaxError> {
        if let Some(p) = used.props.difference(&self.props).next() {
            return Err(SyntaxError::UnknownIdentifier {
                sort: "proposition",
                name: p.clone(),
            });
        }
        if let Some(a) = used.programs.difference(&self.programs).next() {
            return Err(SyntaxError::UnknownIdentifier {
                sort: "atomic program",
                name: a.clone(),
            });
        }
        Ok(())
    }
}

/// Parse a formula, accepting any identifiers.
pub fn parse(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    f.vocabulary().check_disjoint()?;
    Ok(f)
}

/// Parse a formula whose symbols must all belong to `vocab`.
pub fn parse_formula(text: &str, vocab: &Vocabulary) -> Result<Formula, SyntaxError> {
    let f = parse(text)?;
    vocab.admits(&f.vocabulary())?;
    Ok(f)
}

pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let prog = p.program()?;
    p.finish()?;
    prog.vocabulary().check_disjoint()?;
    Ok(prog)
}

pub fn parse_judgement(text: &str) -> Result<Judgement, SyntaxError> {
    let mut p = parser::Parser::new(text)?;
    let j = p.judgement()?;
    p.finish()?;
    j.left.vocabulary().union(&j.right.vocabulary()).check_disjoint()?;
    Ok(j)
}

/// Sugared rendering; `parse(&render(f)) == f`.
pub fn render(f: &Formula) -> String {
    render::render_formula(f, RenderStyle::default())
}

pub fn render_with(f: &Formula, style: RenderStyle) -> String {
    render::render_formula(f, style)
}

pub fn render_program(p: &Program) -> String {
    render::render_program_with(p, RenderStyle::default())
}

pub fn render_program_with(p: &Program, style: RenderStyle) -> String {
    render::render_program_with(p, style)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn prop(s: &str) -> Formula {
        Formula::prop(s)
    }

    fn at(s: &str) -> Program {
        Program::atomic(s)
    }

    #[test]
    fn intersection_diamond() {
        assert_eq!(
            p("<a & b>true"),
            Formula::diamond(Program::inter(at("a"), at("b")), Formula::True)
        );
    }

    #[test]
    fn cyclic_example_parses() {
        let f = p("<(a ; [ (b;a)^ ] false ? ; b)^> true");
        let psi = Formula::boxed(Program::loop_of(Program::seq(at("b"), at("a"))), Formula::bot());
        let body = Program::seq(Program::seq(at("a"), Program::test(psi)), at("b"));
        assert_eq!(f, Formula::diamond(Program::loop_of(body), Formula::True));
    }

    #[test]
    fn implication_is_looser_than_disjunction() {
        assert_eq!(
            p("p -> q | r"),
            Formula::or(Formula::not(prop("p")), Formula::or(prop("q"), prop("r")))
        );
        assert_eq!(p("p -> q -> r"), p("p -> (q -> r)"));
        assert_eq!(p("p & q | r"), p("(p & q) | r"));
        assert_eq!(p("p <-> q -> r"), p("p <-> (q -> r)"));
    }

    #[test]
    fn program_precedence() {
        let got = parse_program("a;b & c + d").unwrap();
        let want = Program::union(
            Program::inter(Program::seq(at("a"), at("b")), at("c")),
            at("d"),
        );
        assert_eq!(got, want);
        assert_eq!(parse_program("a;b^").unwrap(), Program::seq(at("a"), Program::loop_of(at("b"))));
    }

    #[test]
    fn parenthesised_tests_and_programs() {
        assert_eq!(
            parse_program("(p & q)?").unwrap(),
            Program::test(Formula::and(prop("p"), prop("q")))
        );
        assert_eq!(parse_program("(a & b)").unwrap(), Program::inter(at("a"), at("b")));
        assert_eq!(parse_program("(a)^").unwrap(), Program::loop_of(at("a")));
        assert_eq!(parse_program("p?").unwrap(), Program::test(prop("p")));
        assert_eq!(parse_program("~p?").unwrap(), Program::test(Formula::not(prop("p"))));
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::diamond(Program::test(prop("p")), prop("q"))), "<p?>q");
        assert_eq!(render_program(&Program::loop_of(at("a"))), "a^");
        let f = Formula::or(Formula::not(prop("p")), prop("q"));
        assert_eq!(render(&f), "p -> q");
        assert_eq!(render_with(&f, RenderStyle { sugar: false }), "~p | q");
        assert_eq!(render(&p("[a & b]false")), "[a & b]false");
        assert_eq!(render(&p("p & (q & r)")), "p & (q & r)");
        assert_eq!(render(&p("(p -> q) -> r")), "(p -> q) -> r");
        assert_eq!(render_program(&parse_program("a;(b;c)").unwrap()), "a;(b;c)");
        assert_eq!(render_program(&parse_program("(a+b);c").unwrap()), "(a + b);c");
    }

    #[test]
    fn judgements() {
        let j = parse_judgement("a & b => a").unwrap();
        assert_eq!(j.kind, JudgementKind::Implies);
        assert_eq!(j.left, Program::inter(at("a"), at("b")));
        let j = parse_judgement("a & p? <=> (<a^>p)?").unwrap();
        assert_eq!(j.kind, JudgementKind::Equiv);
        assert_eq!(j.to_string(), "a & p? <=> <a^>p?");
    }

    #[test]
    fn strict_vocabulary() {
        let v = Vocabulary::new(["p"], ["a"]).unwrap();
        assert!(parse_formula("<a>p", &v).is_ok());
        assert!(matches!(
            parse_formula("<b>p", &v),
            Err(SyntaxError::UnknownIdentifier { sort: "atomic program", .. })
        ));
        assert!(matches!(parse_formula("<a>a", &v), Err(SyntaxError::SortClash(_))));
        assert!(Vocabulary::new(["x"], ["x"]).is_err());
    }

    #[test]
    fn parse_errors_report_position() {
        match parse("p &") {
            Err(SyntaxError::Parse { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("<a p").is_err());
        assert!(parse("p q").is_err());
        assert!(parse_program("a;").is_err());
    }

    #[test]
    fn usub_examples() {
        let f = p("<q?>p");
        assert_eq!(usub(&f, &p("r & s"), "p"), p("<q?>(r & s)"));
        let f = p("<p?>p");
        assert_eq!(usub(&f, &Formula::bot(), "p"), p("<false?>false"));
    }

    #[test]
    fn psub_examples() {
        let a = at("a");
        let ab = Program::inter(at("a"), at("b"));
        assert_eq!(psub(&p("<a>p"), &a, &ab), p("<a & b>p"));
        assert_eq!(psub(&p("~<a>p"), &a, &ab), p("~<a>p"));
        assert_eq!(psub(&p("<a>p | ~<a>q"), &a, &at("b")), p("<b>p | ~<a>q"));
        // diamonds inside tests are left alone
        assert_eq!(psub(&p("<(<a>p)?>q"), &a, &at("b")), p("<(<a>p)?>q"));
    }

    #[test]
    fn polarity_examples() {
        let a = at("a");
        assert_eq!(polarity_of_occurrences(&p("<a>p"), &a), vec![(vec![], Polarity::Positive)]);
        assert_eq!(
            polarity_of_occurrences(&p("~~<a>p"), &a),
            vec![(vec![0, 0], Polarity::Positive)]
        );
        assert_eq!(
            polarity_of_occurrences(&p("<a>~<a>p"), &a),
            vec![(vec![], Polarity::Positive), (vec![1, 0], Polarity::Negative)]
        );
    }

    #[test]
    fn subterm_and_replace() {
        let f = p("<a;b>~p");
        let t = Term::Formula(f.clone());
        assert_eq!(t.subterm(&[0, 1]), Some(Term::Program(at("b"))));
        let g = t.replace_at(&[0, 1], Term::Program(at("c"))).unwrap();
        assert_eq!(g, Term::Formula(p("<a;c>~p")));
        assert!(t.replace_at(&[0, 1], Term::Formula(Formula::True)).is_none());
        assert!(t.subterm(&[2]).is_none());
    }
}
