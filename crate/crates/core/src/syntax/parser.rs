use super::ast::{Formula, Judgement, JudgementKind, Program};
use super::lexer::{tokenize, Spanned, Tok};
use super::SyntaxError;

/// Recursive-descent parser over a token vector. Formula levels, loosest
/// first: `<->` (right), `->` (right), `|`, `&`, unary. Program levels:
/// `+`, `&`, `;`, postfix `^`, primary.
pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.offset(),
            expected: expected.to_string(),
            found: self
                .peek()
                .map(Tok::describe)
                .unwrap_or_else(|| "end of input".to_string()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn finish(&self) -> Result<(), SyntaxError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.implication()?;
        if self.eat(&Tok::Iff) {
            let right = self.formula()?;
            Ok(Formula::iff(left, right))
        } else {
            Ok(left)
        }
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Imp) {
            let right = self.implication()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LAngle) => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RAngle)?;
                Ok(Formula::diamond(p, self.unary()?))
            }
            Some(Tok::LBrack) => {
                self.bump();
                let p = self.program()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::boxed(p, self.unary()?))
            }
            Some(Tok::True) => {
                self.bump();
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.bump();
                Ok(Formula::bot())
            }
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(Formula::Prop(name)),
                _ => unreachable!(),
            },
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    pub fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.program_inter()?;
        while self.eat(&Tok::Plus) {
            let rhs = self.program_inter()?;
            acc = Program::union(acc, rhs);
        }
        Ok(acc)
    }

    fn program_inter(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.program_seq()?;
        while self.eat(&Tok::And) {
            let rhs = self.program_seq()?;
            acc = Program::inter(acc, rhs);
        }
        Ok(acc)
    }

    fn program_seq(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.program_postfix()?;
        while self.eat(&Tok::Semi) {
            let rhs = self.program_postfix()?;
            acc = Program::seq(acc, rhs);
        }
        Ok(acc)
    }

    fn program_postfix(&mut self) -> Result<Program, SyntaxError> {
        let mut acc = self.program_primary()?;
        while self.eat(&Tok::Caret) {
            acc = Program::loop_of(acc);
        }
        Ok(acc)
    }

    fn program_primary(&mut self) -> Result<Program, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Some(Tok::Ident(name)) = self.bump() else {
                    unreachable!()
                };
                if self.eat(&Tok::Question) {
                    Ok(Program::test(Formula::Prop(name)))
                } else {
                    Ok(Program::Atomic(name))
                }
            }
            Some(Tok::Not | Tok::LAngle | Tok::LBrack | Tok::True | Tok::False) => {
                let f = self.unary()?;
                self.expect(Tok::Question)?;
                Ok(Program::test(f))
            }
            Some(Tok::LParen) => {
                // `(` opens either a parenthesised test formula or a program.
                let save = self.pos;
                if let Ok(f) = self.unary() {
                    if self.eat(&Tok::Question) {
                        return Ok(Program::test(f));
                    }
                }
                self.pos = save + 1;
                let p = self.program()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            _ => Err(self.unexpected("a program")),
        }
    }

    pub fn judgement(&mut self) -> Result<Judgement, SyntaxError> {
        let left = self.program()?;
        let kind = if self.eat(&Tok::Implies) {
            JudgementKind::Implies
        } else if self.eat(&Tok::Equiv) {
            JudgementKind::Equiv
        } else {
            return Err(self.unexpected("`=>` or `<=>`"));
        };
        let right = self.program()?;
        Ok(Judgement::new(kind, left, right))
    }
}
