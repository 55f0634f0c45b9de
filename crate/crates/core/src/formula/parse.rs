//! Concrete syntax.
//!
//! ```text
//! formula := equiv
//! equiv   := imp ('==' imp)*
//! imp     := or ('->' imp)?
//! or      := wedge ('\/' wedge)*
//! wedge   := amp ('/\' amp)*
//! amp     := unary ('&' unary)*
//! unary   := '~' unary | ('A' | 'E') ident '.' formula | primary
//! primary := '(' formula ')' | 'bot' | 'top' | term ('in' | '=' | 'sub') term
//! term    := ident | '#' digits
//! ```
//!
//! A quantifier body extends to the end of the enclosing group.

use thiserror::Error;

use super::{AtomKind, Formula, Term};
use crate::model::ElemId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at column {column}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    /// 1-based column, for diagnostics.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(u32),
    In,
    Sub,
    Eq,
    Amp,
    Wedge,
    Vee,
    Arrow,
    Tilde,
    Equiv,
    Bot,
    Top,
    Forall,
    Exists,
    Dot,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Const(n) => format!("constant `#{n}`"),
            Tok::In => "`in`".into(),
            Tok::Sub => "`sub`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Wedge => "`/\\`".into(),
            Tok::Vee => "`\\/`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Equiv => "`==`".into(),
            Tok::Bot => "`bot`".into(),
            Tok::Top => "`top`".into(),
            Tok::Forall => "`A`".into(),
            Tok::Exists => "`E`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn error(text: &str, offset: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        offset,
        column: text[..offset.min(text.len())].chars().count() + 1,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &str| text[i..].starts_with(s);
        let tok = if two("->") {
            i += 2;
            Tok::Arrow
        } else if two("==") {
            i += 2;
            Tok::Equiv
        } else if two("/\\") {
            i += 2;
            Tok::Wedge
        } else if two("\\/") {
            i += 2;
            Tok::Vee
        } else {
            match c {
                b'&' => {
                    i += 1;
                    Tok::Amp
                }
                b'~' => {
                    i += 1;
                    Tok::Tilde
                }
                b'=' => {
                    i += 1;
                    Tok::Eq
                }
                b'.' => {
                    i += 1;
                    Tok::Dot
                }
                b'(' => {
                    i += 1;
                    Tok::LParen
                }
                b')' => {
                    i += 1;
                    Tok::RParen
                }
                b'#' => {
                    i += 1;
                    let digits_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let digits = &text[digits_start..i];
                    let n = digits
                        .parse::<u32>()
                        .map_err(|_| error(text, start, "expected digits after `#`"))?;
                    Tok::Const(n)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    match &text[start..i] {
                        "in" => Tok::In,
                        "sub" => Tok::Sub,
                        "bot" => Tok::Bot,
                        "top" => Tok::Top,
                        "A" => Tok::Forall,
                        "E" => Tok::Exists,
                        word => Tok::Ident(word.to_string()),
                    }
                }
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(error(text, start, format!("unexpected character `{ch}`")));
                }
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.text.len(), |(o, _)| *o)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", tok.describe())))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of input".into(),
        };
        error(self.text, self.offset(), format!("{what}, found {found}"))
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.eat(&Tok::Equiv) {
            let rhs = self.imp()?;
            lhs = Formula::equiv(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.wedge()?;
        while self.eat(&Tok::Vee) {
            let rhs = self.wedge()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn wedge(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.amp()?;
        while self.eat(&Tok::Wedge) {
            let rhs = self.amp()?;
            lhs = Formula::weak(lhs, rhs);
        }
        Ok(lhs)
    }

    fn amp(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::strong(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::neg(self.unary()?))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => {
                let universal = self.peek() == Some(&Tok::Forall);
                self.pos += 1;
                let var = match self.peek() {
                    Some(Tok::Ident(v)) => v.clone(),
                    _ => return Err(self.unexpected("expected a variable after quantifier")),
                };
                self.pos += 1;
                self.expect(Tok::Dot)?;
                let body = self.formula()?;
                Ok(if universal {
                    Formula::forall(&var, body)
                } else {
                    Formula::exists(&var, body)
                })
            }
            _ => self.primary(),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Ident(v)) => {
                let t = Term::Var(v.clone());
                self.pos += 1;
                Ok(t)
            }
            Some(Tok::Const(n)) => {
                let t = Term::Const(ElemId(*n));
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.unexpected("expected a term")),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Bot) => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Some(Tok::Top) => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            _ => {
                let lhs = self.term()?;
                let kind = match self.peek() {
                    Some(Tok::In) => AtomKind::Mem,
                    Some(Tok::Eq) => AtomKind::Eq,
                    Some(Tok::Sub) => AtomKind::Sub,
                    _ => return Err(self.unexpected("expected `in`, `=` or `sub`")),
                };
                self.pos += 1;
                let rhs = self.term()?;
                Ok(Formula::atom(kind, lhs, rhs))
            }
        }
    }
}

/// Parses one formula. Unbound variables are accepted; scoping is checked at evaluation.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { text, toks, pos: 0 };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("expected end of formula"));
    }
    Ok(f)
}
