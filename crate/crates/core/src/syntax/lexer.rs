use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Imp,
    Iff,
    LAngle,
    RAngle,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Semi,
    Plus,
    Question,
    Caret,
    Implies,
    Equiv,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Imp => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::LAngle => "`<`".into(),
            Tok::RAngle => "`>`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Question => "`?`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Equiv => "`<=>`".into(),
        }
    }
}

/// Token plus its byte offset in the input.
pub type Spanned = (Tok, usize);

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_lowercase() {
            let mut name = String::new();
            while let Some(&(_, d)) = chars.peek() {
                if d.is_ascii_lowercase() || d.is_ascii_digit() || d == '_' {
                    name.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            let tok = match name.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(name),
            };
            out.push((tok, pos));
            continue;
        }
        chars.next();
        let rest = &text[pos..];
        let (tok, extra) = match c {
            '<' if rest.starts_with("<->") => (Tok::Iff, 2),
            '<' if rest.starts_with("<=>") => (Tok::Equiv, 2),
            '<' => (Tok::LAngle, 0),
            '-' if rest.starts_with("->") => (Tok::Imp, 1),
            '=' if rest.starts_with("=>") => (Tok::Implies, 1),
            '>' => (Tok::RAngle, 0),
            '~' | '!' | '¬' => (Tok::Not, 0),
            '&' | '∧' | '∩' => (Tok::And, 0),
            '|' | '∨' => (Tok::Or, 0),
            '+' | '∪' => (Tok::Plus, 0),
            '[' => (Tok::LBrack, 0),
            ']' => (Tok::RBrack, 0),
            '(' => (Tok::LParen, 0),
            ')' => (Tok::RParen, 0),
            ';' => (Tok::Semi, 0),
            '?' => (Tok::Question, 0),
            '^' => {
                if rest["^".len()..].starts_with('⟲') {
                    chars.next();
                }
                (Tok::Caret, 0)
            }
            '⟲' => (Tok::Caret, 0),
            '→' => (Tok::Imp, 0),
            '↔' => (Tok::Iff, 0),
            '⟨' => (Tok::LAngle, 0),
            '⟩' => (Tok::RAngle, 0),
            '⊤' => (Tok::True, 0),
            '⊥' => (Tok::False, 0),
            '⇒' => (Tok::Implies, 0),
            '⇔' => (Tok::Equiv, 0),
            _ => {
                return Err(SyntaxError::Lex {
                    pos,
                    found: c,
                })
            }
        };
        for _ in 0..extra {
            chars.next();
        }
        out.push((tok, pos));
    }
    Ok(out)
}
