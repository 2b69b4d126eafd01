use num_bigint::BigInt;

use super::{Formula, Term};
use crate::error::{Error, Result};

const KEYWORDS: &[&str] = &[
    "forall", "exists", "and", "or", "not", "->", "=", "<", "+", "-", "scale", "U", "D", "const",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
}

fn tokenize(src: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' {
            out.push((i, Tok::Open));
            i += 1;
        } else if c == b')' {
            out.push((i, Tok::Close));
            i += 1;
        } else if c == b';' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                i += 1;
            }
            out.push((start, Tok::Atom(&src[start..i])));
        }
    }
    out
}

/// Parses one formula in the s-expression text format.
pub fn parse(src: &str) -> Result<Formula> {
    let mut p = Parser { toks: tokenize(src), pos: 0, end: src.len() };
    let f = p.formula()?;
    if let Some((at, _)) = p.toks.get(p.pos) {
        return Err(Error::Syntax { pos: *at, msg: "trailing input after formula".into() });
    }
    f.validate()?;
    Ok(f)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&s)
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl<'a> Parser<'a> {
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.here(), msg: msg.into() })
    }

    fn next(&mut self) -> Option<Tok<'a>> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn expect_open(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Open) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected '('"),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            None => self.err("unexpected end of input, expected ')'"),
            _ => self.err("expected ')'"),
        }
    }

    fn atom(&mut self) -> Result<&'a str> {
        match self.peek() {
            Some(Tok::Atom(a)) => {
                let a = *a;
                self.pos += 1;
                Ok(a)
            }
            None => self.err("unexpected end of input"),
            _ => self.err("expected an atom"),
        }
    }

    fn positive_param(&mut self, what: &str) -> Result<u64> {
        let at = self.here();
        let a = self.atom()?;
        match a.parse::<u64>() {
            Ok(v) => Ok(v),
            Err(_) => Err(Error::Syntax { pos: at, msg: format!("expected a natural number for {what}, found {a:?}") }),
        }
    }

    fn variable(&mut self) -> Result<String> {
        let at = self.here();
        let a = self.atom()?;
        if is_ident(a) {
            Ok(a.to_string())
        } else {
            Err(Error::Syntax { pos: at, msg: format!("expected a variable name, found {a:?}") })
        }
    }

    fn at_close(&self) -> bool {
        matches!(self.peek(), Some(Tok::Close))
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Open) => {}
            Some(Tok::Atom(a)) if *a == "true" => {
                self.pos += 1;
                return Ok(Formula::truth());
            }
            Some(Tok::Atom(a)) if *a == "false" => {
                self.pos += 1;
                return Ok(Formula::falsity());
            }
            None => return self.err("unexpected end of input, expected a formula"),
            _ => return self.err("expected a formula"),
        }
        self.expect_open()?;
        let head_at = self.here();
        let head = self.atom()?;
        let f = match head {
            "forall" | "exists" => {
                let v = self.variable()?;
                let body = self.formula()?;
                if head == "forall" {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                }
            }
            "and" | "or" => {
                let mut parts = Vec::new();
                while !self.at_close() {
                    if self.peek().is_none() {
                        return self.err("unexpected end of input, expected ')'");
                    }
                    parts.push(self.formula()?);
                }
                if head == "and" {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
            "not" => Formula::not(self.formula()?),
            "->" => {
                let a = self.formula()?;
                let b = self.formula()?;
                Formula::implies(a, b)
            }
            "=" | "<" => {
                let a = self.term()?;
                let b = self.term()?;
                if head == "=" {
                    Formula::Eq(a, b)
                } else {
                    Formula::Lt(a, b)
                }
            }
            "U" => {
                let b = self.positive_param("U base")?;
                Formula::U(b, self.term()?)
            }
            "D" => {
                let n = self.positive_param("D modulus")?;
                Formula::D(n, self.term()?)
            }
            other => {
                return Err(Error::Syntax { pos: head_at, msg: format!("unknown formula head {other:?}") });
            }
        };
        self.expect_close()?;
        Ok(f)
    }

    fn term(&mut self) -> Result<Term> {
        let at = self.here();
        match self.next() {
            None => self.err("unexpected end of input, expected a term"),
            Some(Tok::Close) => Err(Error::Syntax { pos: at, msg: "expected a term".into() }),
            Some(Tok::Atom(a)) => {
                if let Some(n) = parse_int(a) {
                    Ok(Term::constant(n))
                } else if is_ident(a) {
                    Ok(Term::var(a))
                } else {
                    Err(Error::Syntax { pos: at, msg: format!("expected a term, found {a:?}") })
                }
            }
            Some(Tok::Open) => {
                let head_at = self.here();
                let head = self.atom()?;
                let t = match head {
                    "+" => {
                        let mut acc = Term::zero();
                        while !self.at_close() {
                            if self.peek().is_none() {
                                return self.err("unexpected end of input, expected ')'");
                            }
                            acc = acc.add(&self.term()?);
                        }
                        acc
                    }
                    "-" => {
                        let first = self.term()?;
                        if self.at_close() {
                            first.neg()
                        } else {
                            let mut acc = first;
                            while !self.at_close() {
                                if self.peek().is_none() {
                                    return self.err("unexpected end of input, expected ')'");
                                }
                                acc = acc.sub(&self.term()?);
                            }
                            acc
                        }
                    }
                    "scale" => {
                        let c_at = self.here();
                        let c = self.atom()?;
                        let c = parse_int(c).ok_or(Error::Syntax {
                            pos: c_at,
                            msg: format!("scale expects an integer coefficient, found {c:?}"),
                        })?;
                        self.term()?.scale(&c)
                    }
                    "const" => {
                        let c_at = self.here();
                        let c = self.atom()?;
                        Term::constant(parse_int(c).ok_or(Error::Syntax {
                            pos: c_at,
                            msg: format!("const expects an integer, found {c:?}"),
                        })?)
                    }
                    "*" => {
                        return Err(Error::Syntax {
                            pos: head_at,
                            msg: "multiplication of terms is not in the language; use (scale n t)".into(),
                        })
                    }
                    other => {
                        return Err(Error::Syntax { pos: head_at, msg: format!("unknown term head {other:?}") });
                    }
                };
                self.expect_close()?;
                Ok(t)
            }
        }
    }
}
