//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('-'|'+')* power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | 'I' | 'ln' '(' expr ')' | 'exp' '(' expr ')'
//!         | 'D' '[' expr ',' coordinate ',' integer ']'
//!         | identifier | '(' expr ')'
//! ```
//!
//! `I` is the imaginary unit; `D[f,x,k]` is the k-th partial derivative in
//! `x` and nests for mixed partials. Numbers become exact rationals when the
//! arithmetic fits in `i64`, doubles otherwise. Identifiers resolve against a
//! [`Workspace`]; unknown names are reported with the offending identifier.


use super::calculus::differentiate;
use super::canonical::simplify;
use super::scalar::Scalar;
use super::symbol::{SymbolKind, Workspace};
use super::{DerivOrders, Expr, ExprError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Scalar),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        offset,
        message: message.into(),
    }
}

impl<'a> Lexer<'a> {
    fn tokenize(text: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while lx.pos < lx.src.len() {
            let start = lx.pos;
            let c = lx.src[lx.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    lx.pos += 1;
                }
                b'+' => out.push((Tok::Plus, lx.advance())),
                b'-' => out.push((Tok::Minus, lx.advance())),
                b'*' => out.push((Tok::Star, lx.advance())),
                b'/' => out.push((Tok::Slash, lx.advance())),
                b'^' => out.push((Tok::Caret, lx.advance())),
                b'(' => out.push((Tok::LParen, lx.advance())),
                b')' => out.push((Tok::RParen, lx.advance())),
                b'[' => out.push((Tok::LBracket, lx.advance())),
                b']' => out.push((Tok::RBracket, lx.advance())),
                b',' => out.push((Tok::Comma, lx.advance())),
                b'0'..=b'9' | b'.' => {
                    let num = lx.number(start)?;
                    out.push((Tok::Num(num), start));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = lx.pos;
                    while end < lx.src.len()
                        && (lx.src[end].is_ascii_alphanumeric() || lx.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&lx.src[lx.pos..end]).unwrap().to_string();
                    lx.pos = end;
                    out.push((Tok::Ident(name), start));
                }
                _ => return Err(syntax(start, format!("unexpected character `{}`", c as char))),
            }
        }
        Ok(out)
    }

    fn advance(&mut self) -> usize {
        let p = self.pos;
        self.pos += 1;
        p
    }

    fn number(&mut self, start: usize) -> Result<Scalar, ExprError> {
        let mut end = self.pos;
        let mut seen_dot = false;
        let mut seen_exp = false;
        while end < self.src.len() {
            let c = self.src[end];
            if c.is_ascii_digit() {
                end += 1;
            } else if c == b'.' && !seen_dot && !seen_exp {
                seen_dot = true;
                end += 1;
            } else if (c == b'e' || c == b'E')
                && !seen_exp
                && end + 1 < self.src.len()
                && (self.src[end + 1].is_ascii_digit()
                    || ((self.src[end + 1] == b'+' || self.src[end + 1] == b'-')
                        && end + 2 < self.src.len()
                        && self.src[end + 2].is_ascii_digit()))
            {
                seen_exp = true;
                end += 1;
                if self.src[end] == b'+' || self.src[end] == b'-' {
                    end += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
        self.pos = end;
        exact_from_decimal(text).ok_or(()).or_else(|_| {
            text.parse::<f64>()
                .map(Scalar::from_f64)
                .map_err(|_| syntax(start, format!("malformed number `{}`", text)))
        })
    }
}

/// Parse a decimal literal into an exact rational if every step fits in i64.
fn exact_from_decimal(text: &str) -> Option<Scalar> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    let digits = format!("{}{}", int_part, frac_part);
    if digits.is_empty() {
        return None;
    }
    let num: i64 = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let mut numer = num;
    let mut denom: i64 = 1;
    if scale >= 0 {
        for _ in 0..scale {
            numer = numer.checked_mul(10)?;
        }
    } else {
        for _ in 0..(-scale) {
            denom = denom.checked_mul(10)?;
        }
    }
    Some(Scalar::from_ratio(numer, denom))
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ws: &'a Workspace,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.len)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        let off = self.offset();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => Err(syntax(off, format!("expected {}", what))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    acc = acc.add(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.next();
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.next();
                    acc = acc.mul(self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.next();
                    acc = acc.div(self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.next();
                Ok(self.factor()?.neg())
            }
            Some(Tok::Plus) => {
                self.next();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn integer(&mut self, what: &str) -> Result<i64, ExprError> {
        let off = self.offset();
        let negative = if matches!(self.peek(), Some(Tok::Minus)) {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Num(Scalar::Exact { re, im }))
                if im == num_rational::Ratio::from_integer(0) && *re.denom() == 1 =>
            {
                let v = *re.numer();
                Ok(if negative { -v } else { v })
            }
            _ => Err(syntax(off, format!("expected integer {}", what))),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.next();
            let off = self.offset();
            let n = self.integer("exponent")?;
            let n32 = i32::try_from(n).map_err(|_| syntax(off, "exponent out of range"))?;
            Ok(base.pow(n32))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        match self.next() {
            Some(Tok::Num(s)) => Ok(Expr::Const(s)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "I" => Ok(Expr::i()),
                "ln" | "exp" => {
                    self.expect(Tok::LParen, "`(`")?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(if name == "ln" {
                        inner.ln()
                    } else {
                        inner.exp()
                    })
                }
                "D" => self.derivative(),
                _ => match self.ws.lookup(&name) {
                    Some(sym) => Ok(Expr::Sym(sym)),
                    None => Err(ExprError::UnknownSymbol { name }),
                },
            },
            _ => Err(syntax(off, "expected an expression")),
        }
    }

    fn derivative(&mut self) -> Result<Expr, ExprError> {
        self.expect(Tok::LBracket, "`[` after D")?;
        let inner = self.expr()?;
        self.expect(Tok::Comma, "`,`")?;
        let coff = self.offset();
        let coord = match self.next() {
            Some(Tok::Ident(name)) => match self.ws.lookup(&name) {
                Some(sym) if sym.kind == SymbolKind::Coordinate => sym,
                Some(_) => {
                    return Err(ExprError::KindMismatch {
                        name,
                        detail: "derivative coordinate must be a base coordinate".into(),
                    })
                }
                None => return Err(ExprError::UnknownSymbol { name }),
            },
            _ => return Err(syntax(coff, "expected coordinate name")),
        };
        self.expect(Tok::Comma, "`,`")?;
        let order = self.integer("derivative order")?;
        if order < 0 {
            return Err(syntax(coff, "derivative order must be non-negative"));
        }
        self.expect(Tok::RBracket, "`]`")?;

        // Formal derivatives of jet variables bump the multi-index directly;
        // anything else differentiates repeatedly.
        match &inner {
            Expr::Sym(s) if s.kind == SymbolKind::JetVariable => {
                if order == 0 {
                    return Ok(inner);
                }
                Ok(Expr::Deriv(
                    s.clone(),
                    DerivOrders::new(vec![(coord, order as u32)]),
                ))
            }
            Expr::Deriv(s, ords) if s.kind == SymbolKind::JetVariable => {
                let mut pairs = ords.pairs().to_vec();
                pairs.push((coord, order as u32));
                Ok(Expr::Deriv(s.clone(), DerivOrders::new(pairs)))
            }
            _ => {
                let mut acc = inner;
                for _ in 0..order {
                    acc = differentiate(&acc, &coord)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Parse a textual expression against a workspace and return the canonical
/// (simplified) tree.
pub fn parse(ws: &Workspace, text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        ws,
        len: text.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(syntax(p.offset(), "trailing input"));
    }
    simplify(&e)
}
