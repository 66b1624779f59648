//! Tokenizer and recursive-descent parser for terms and identities.

use super::{Coef, Identity, Syntax, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Eq,
    End,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse::<u64>().map_err(|_| Error::Parse {
                    line: 1,
                    col,
                    msg: format!("number `{s}` is too large"),
                })?;
                out.push((Tok::Nat(n), col));
                continue;
            }
            _ if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            _ => {
                return Err(Error::Parse { line: 1, col, msg: format!("unexpected character `{c}`") });
            }
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    syn: &'a Syntax,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: 1, col: self.col(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn sum(&mut self) -> Result<Term> {
        let mut acc = self.prod()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.prod()?;
                    acc = Term::Plus(Box::new(acc), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.prod()?;
                    acc = Term::Plus(Box::new(acc), Box::new(Term::Neg(Box::new(rhs))));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn coef_ahead(&self) -> Option<Coef> {
        let next_is_star = matches!(self.toks.get(self.pos + 1), Some((Tok::Star, _)));
        if !next_is_star {
            return None;
        }
        match self.peek() {
            Tok::Nat(n) => Some(Coef::Int(n % self.syn.modulus)),
            Tok::Ident(name) => self.syn.param_index(name).map(Coef::Param),
            _ => None,
        }
    }

    fn prod(&mut self) -> Result<Term> {
        if let Some(c) = self.coef_ahead() {
            self.bump();
            self.bump();
            let inner = self.prod()?;
            return Ok(Term::Scalar(c, Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Term> {
        let col = self.col();
        match self.bump() {
            Tok::Nat(0) => Ok(Term::Zero),
            Tok::Nat(n) => Err(Error::Parse { line: 1, col, msg: format!("literal `{n}` must be followed by `*`") }),
            Tok::Minus => Ok(Term::Neg(Box::new(self.atom()?))),
            Tok::LParen => {
                let t = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LBrack => {
                let Some(b) = self.syn.bracket else {
                    return Err(Error::Parse { line: 1, col, msg: "no bracket operation is designated".into() });
                };
                let x = self.sum()?;
                self.expect(Tok::Comma, "`,`")?;
                let y = self.sum()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Term::Apply(b, vec![x, y]))
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.sum()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.sum()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                    let f = self.syn.sig.index_of(&name).ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
                    let expected = self.syn.sig.arity(f);
                    if args.len() != expected {
                        return Err(Error::ArityMismatch { symbol: name, expected, found: args.len() });
                    }
                    Ok(Term::Apply(f, args))
                } else if self.syn.sig.index_of(&name).is_some() {
                    Err(Error::Parse { line: 1, col, msg: format!("operation `{name}` used as a variable") })
                } else if self.syn.param_index(&name).is_some() {
                    Err(Error::Parse { line: 1, col, msg: format!("parameter `{name}` must be followed by `*`") })
                } else {
                    Ok(Term::Var(name))
                }
            }
            Tok::End => Err(Error::Parse { line: 1, col, msg: "unexpected end of input".into() }),
            t => Err(Error::Parse { line: 1, col, msg: format!("unexpected token {t:?}") }),
        }
    }
}

pub fn parse_term(text: &str, syn: &Syntax) -> Result<Term> {
    let mut p = Parser { toks: lex(text)?, pos: 0, syn };
    let t = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(t)
}

pub fn parse_identity(text: &str, syn: &Syntax) -> Result<Identity> {
    let mut p = Parser { toks: lex(text)?, pos: 0, syn };
    let lhs = p.sum()?;
    p.expect(Tok::Eq, "`=`")?;
    let rhs = p.sum()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(Identity::new(lhs, rhs))
}
