//! Recursive-descent parser for the infix expression grammar.

use alloc::string::String;
use core::fmt;

use super::{BinOp, Dialect, Expr, EULER};

/// Maximum nesting depth accepted by the parser; guards against stack
/// exhaustion on adversarial input.
const MAX_NESTING: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A character that fits no token.
    UnexpectedChar(char),
    /// Input ended where an atom or operator was required.
    UnexpectedEnd,
    /// An atom (number, identifier or parenthesised expression) was
    /// expected.
    ExpectedAtom,
    /// A specific punctuation token was expected.
    Expected(char),
    /// Input continued past a complete expression.
    TrailingInput,
    /// A numeric literal that does not fit a finite double.
    InvalidNumber,
    /// `ln`, `^` or the constant `e` used in the gp dialect.
    BudgetOnly(&'static str),
    /// Nesting deeper than the parser accepts.
    TooDeep,
}

/// Syntax error with the byte offset at which it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::UnexpectedChar(c) => {
                write!(f, "unexpected character `{c}` at position {}", self.position)
            }
            ParseErrorKind::UnexpectedEnd => {
                write!(f, "unexpected end of input at position {}", self.position)
            }
            ParseErrorKind::ExpectedAtom => write!(
                f,
                "expected a number, identifier or `(` at position {}",
                self.position
            ),
            ParseErrorKind::Expected(c) => {
                write!(f, "expected `{c}` at position {}", self.position)
            }
            ParseErrorKind::TrailingInput => {
                write!(f, "trailing input at position {}", self.position)
            }
            ParseErrorKind::InvalidNumber => {
                write!(f, "invalid numeric literal at position {}", self.position)
            }
            ParseErrorKind::BudgetOnly(what) => write!(
                f,
                "`{what}` is only allowed in budget expressions (position {})",
                self.position
            ),
            ParseErrorKind::TooDeep => {
                write!(f, "expression nested too deeply at position {}", self.position)
            }
        }
    }
}

impl core::error::Error for ParseError {}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    dialect: Dialect,
}

pub(super) fn parse(text: &str, dialect: Dialect) -> Result<Expr, ParseError> {
    let mut p = Parser {
        text,
        pos: 0,
        dialect,
    };
    let expr = p.expr(0)?;
    p.skip_ws();
    if p.pos < p.text.len() {
        return Err(p.error(ParseErrorKind::TrailingInput));
    }
    Ok(expr)
}

impl<'a> Parser<'a> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    /// Consumes `c` if it is the next non-whitespace character.
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Expected(c)))
        }
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_NESTING {
            return Err(self.error(ParseErrorKind::TooDeep));
        }
        let mut lhs = self.term(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some('+') => BinOp::Add,
                Some('-') => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term(depth + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let mut lhs = self.factor(depth + 1)?;
        loop {
            let op = match self.peek() {
                Some('*') => BinOp::Mul,
                Some('/') => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor(depth + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self, depth: usize) -> Result<Expr, ParseError> {
        let base = self.atom(depth + 1)?;
        if self.peek() == Some('^') {
            if self.dialect == Dialect::Gp {
                return Err(self.error(ParseErrorKind::BudgetOnly("^")));
            }
            self.pos += 1;
            let exponent = self.atom(depth + 1)?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<Expr, ParseError> {
        if depth > MAX_NESTING {
            return Err(self.error(ParseErrorKind::TooDeep));
        }
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
        };
        if c == '-' {
            self.pos += 1;
            let inner = self.atom(depth + 1)?;
            return Ok(match inner {
                Expr::Const(v) => Expr::Const(-v),
                other => Expr::binary(BinOp::Sub, Expr::constant(0.0), other),
            });
        }
        if c == '(' {
            self.pos += 1;
            let inner = self.expr(depth + 1)?;
            self.expect(')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == '_' {
            return self.ident();
        }
        Err(self.error(ParseErrorKind::ExpectedAtom))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = self.pos;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            let frac_start = end + 1;
            let mut frac_end = frac_start;
            while frac_end < bytes.len() && bytes[frac_end].is_ascii_digit() {
                frac_end += 1;
            }
            if frac_end > frac_start {
                end = frac_end;
            }
        }
        let literal = &self.text[start..end];
        self.pos = end;
        match literal.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Const(v)),
            _ => Err(ParseError {
                position: start,
                kind: ParseErrorKind::InvalidNumber,
            }),
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = self.pos;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let name = &self.text[start..end];
        self.pos = end;
        match name {
            "ln" => {
                if self.dialect == Dialect::Gp {
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::BudgetOnly("ln"),
                    });
                }
                self.expect('(')?;
                let inner = self.expr(0)?;
                self.expect(')')?;
                Ok(Expr::ln(inner))
            }
            "e" => {
                if self.dialect == Dialect::Gp {
                    return Err(ParseError {
                        position: start,
                        kind: ParseErrorKind::BudgetOnly("e"),
                    });
                }
                Ok(Expr::Const(EULER))
            }
            _ => Ok(Expr::Feature(String::from(name))),
        }
    }
}
