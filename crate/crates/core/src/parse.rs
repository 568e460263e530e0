//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence, tightest first: `~`, `<m>`/`[m]`, `&`, `|`, `->`, `<->`.
//! `->` associates to the right, the other binary connectives to the left.
//! Temporal operators bind loosest and do not associate.

use crate::formula::{Dsl, Temporal};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared component `{name}` at offset {pos}")]
    UndeclaredComponent { name: String, pos: usize },
    #[error("temporal operator `{op}` nested inside a temporal operand at offset {pos}")]
    NestedTemporal { op: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Tilde,
    Lt,
    Gt,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Temporal(&'static str),
    Eof,
}

const TEMPORAL_KEYWORDS: [&str; 7] = [
    "leads_to_c",
    "because_c",
    "leads_to",
    "because",
    "unless",
    "init",
    "stable",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
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
        let tok = match c {
            b'~' => {
                i += 1;
                Tok::Tilde
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'|' => {
                i += 1;
                Tok::Bar
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b'[' => {
                i += 1;
                Tok::LBrack
            }
            b']' => {
                i += 1;
                Tok::RBrack
            }
            b'>' => {
                i += 1;
                Tok::Gt
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Arrow
            }
            b'<' if text[i..].starts_with("<->") => {
                i += 3;
                Tok::DArrow
            }
            b'<' => {
                i += 1;
                Tok::Lt
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    w => match TEMPORAL_KEYWORDS.iter().find(|k| **k == w) {
                        Some(k) => Tok::Temporal(k),
                        None => Tok::Ident(w.to_string()),
                    },
                }
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!(
                        "unexpected character `{}`",
                        text[i..].chars().next().unwrap()
                    ),
                })
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    components: Option<&'a [String]>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        if let Tok::Temporal(op) = self.peek() {
            return ParseError::NestedTemporal {
                op: op.to_string(),
                pos: self.pos(),
            };
        }
        ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {what}, found {:?}", self.peek()),
        }
    }

    fn component(&mut self) -> Result<String, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(name) => {
                if let Some(decl) = self.components {
                    if !decl.iter().any(|c| *c == name) {
                        return Err(ParseError::UndeclaredComponent { name, pos });
                    }
                }
                Ok(name)
            }
            _ => Err(ParseError::Syntax {
                pos,
                msg: "expected component name".into(),
            }),
        }
    }

    fn dsl(&mut self) -> Result<Dsl, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.imp()?;
            lhs = Dsl::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Dsl, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Dsl::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Dsl, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = Dsl::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Dsl, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Dsl::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Dsl, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Dsl::Not(Box::new(self.unary()?)))
            }
            Tok::Lt => {
                self.bump();
                let c = self.component()?;
                self.expect(Tok::Gt, "`>`")?;
                Ok(Dsl::Loc(c, Box::new(self.unary()?)))
            }
            Tok::LBrack => {
                self.bump();
                let c = self.component()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Dsl::Box(c, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Dsl, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Dsl::True)
            }
            Tok::False => {
                self.bump();
                Ok(Dsl::False)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Dsl::Prop(name))
            }
            Tok::LParen => {
                self.bump();
                let f = self.dsl()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn temporal(&mut self) -> Result<Temporal, ParseError> {
        if let Tok::Temporal(kw @ ("init" | "stable")) = *self.peek() {
            self.bump();
            let f = self.dsl()?;
            return Ok(if kw == "init" {
                Temporal::Init(f)
            } else {
                Temporal::Stable(f)
            });
        }
        let lhs = self.dsl()?;
        let Tok::Temporal(kw) = *self.peek() else {
            return Ok(Temporal::Plain(lhs));
        };
        let pos = self.pos();
        if matches!(kw, "init" | "stable") {
            return Err(ParseError::NestedTemporal { op: kw.into(), pos });
        }
        self.bump();
        let rhs = self.dsl()?;
        Ok(match kw {
            "leads_to" => Temporal::LeadsTo(lhs, rhs),
            "because" => Temporal::Because(lhs, rhs),
            "leads_to_c" => Temporal::LeadsToC(lhs, rhs),
            "because_c" => Temporal::BecauseC(lhs, rhs),
            "unless" => Temporal::Unless(lhs, rhs),
            _ => unreachable!(),
        })
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            Tok::Temporal(op) => Err(ParseError::NestedTemporal {
                op: op.to_string(),
                pos: self.pos(),
            }),
            _ => Err(self.unexpected("end of input")),
        }
    }
}

fn parser<'a>(text: &str, components: Option<&'a [String]>) -> Result<Parser<'a>, ParseError> {
    Ok(Parser {
        toks: lex(text)?,
        at: 0,
        components,
    })
}

/// Parses a DSL formula without checking component names.
pub fn parse_dsl(text: &str) -> Result<Dsl, ParseError> {
    parse_dsl_in(text, None)
}

/// Parses a DSL formula; when `components` is given every location must name
/// one of them.
pub fn parse_dsl_in(text: &str, components: Option<&[String]>) -> Result<Dsl, ParseError> {
    let mut p = parser(text, components)?;
    let f = p.dsl()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_temporal(text: &str) -> Result<Temporal, ParseError> {
    parse_temporal_in(text, None)
}

pub fn parse_temporal_in(
    text: &str,
    components: Option<&[String]>,
) -> Result<Temporal, ParseError> {
    let mut p = parser(text, components)?;
    let f = p.temporal()?;
    p.finish()?;
    Ok(f)
}

/// Parses a spec file: one formula per line, `#` starts a comment.
/// Errors carry the 1-based line number.
pub fn parse_spec(
    text: &str,
    components: Option<&[String]>,
) -> Result<Vec<Temporal>, (usize, ParseError)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, l)| parse_temporal_in(l, components).map_err(|e| (n, e)))
        .collect()
}
