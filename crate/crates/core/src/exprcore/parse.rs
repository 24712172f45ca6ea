//! Recursive-descent parser for the scalar-field expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' integer)?
//! atom   := number | ident | func '(' expr ')' | '(' expr ')' | '-' atom
//! ident  := 'x' integer
//! func   := 'sin' | 'cos' | 'exp' | 'sqrt'
//! ```
//!
//! A unary minus applied to a numeric literal folds into a negative literal,
//! so `-2*x2` parses to `Mul(Num(-2), Var(1))`. The exponent after `^` may
//! carry a leading minus sign.

use super::ast::{Func, Node};
use crate::error::ParseError;

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn syntax(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax { offset: self.pos, expected: expected.to_vec() }
    }

    fn expect(&mut self, b: u8, name: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.integer(true)?;
            return Ok(Node::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn integer(&mut self, signed: bool) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if signed && self.bytes.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = digits;
            return Err(self.syntax(&["integer"]));
        }
        self.src[start..self.pos].parse().map_err(|_| {
            self.pos = start;
            self.syntax(&["integer"])
        })
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let b = self.bytes;
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < b.len() && b[*p].is_ascii_digit() {
                *p += 1;
            }
            *p > s
        };
        let mut p = self.pos;
        let int_part = digits(&mut p);
        let mut frac_part = false;
        if p < b.len() && b[p] == b'.' {
            p += 1;
            frac_part = digits(&mut p);
        }
        if !int_part && !frac_part {
            return Err(self.syntax(&["number"]));
        }
        if p < b.len() && (b[p] == b'e' || b[p] == b'E') {
            let mut q = p + 1;
            if q < b.len() && (b[q] == b'+' || b[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
            }
        }
        self.pos = p;
        self.src[start..p]
            .parse::<f64>()
            .map(Node::Num)
            .map_err(|_| ParseError::Syntax { offset: start, expected: vec!["number"] })
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        const ATOM: &[&str] = &["number", "identifier", "function", "'('", "'-'"];
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                match self.atom()? {
                    Node::Num(v) => Ok(Node::Num(-v)),
                    other => Ok(Node::Neg(Box::new(other))),
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && is_ident_byte(self.bytes[self.pos]) {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                if let Some(func) = Func::from_name(word) {
                    self.expect(b'(', "'('")?;
                    let arg = self.expr()?;
                    self.expect(b')', "')'")?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                let idx = word
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| ParseError::UnknownSymbol { offset: start, symbol: word.to_string() })?;
                if idx == 0 || idx > self.dim {
                    return Err(ParseError::CoordinateOutOfRange { offset: start, index: idx, dim: self.dim });
                }
                Ok(Node::Var(idx - 1))
            }
            _ => Err(self.syntax(ATOM)),
        }
    }
}

pub(crate) fn parse_node(src: &str, dim: usize) -> Result<Node, ParseError> {
    if src.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0, dim };
    let node = p.expr()?;
    if p.peek().is_some() {
        return Err(p.syntax(&["operator", "end of input"]));
    }
    Ok(node)
}
