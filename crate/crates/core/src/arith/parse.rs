//! Infix syntax for predicates over concrete variables.
//!
//! ```text
//! formula := or ('<->' or)?
//! or      := and (('||' | '|' | '∨') and)*
//! and     := unary (('&&' | '&' | '∧') unary)*
//! unary   := ('!' | '¬') unary | 'true' | 'false' | term rel term | '(' formula ')'
//! rel     := '<=' | '≤' | '<' | '>=' | '≥' | '>' | '==' | '=' | '!=' | '≠'
//! term    := product (('+' | '-') product)*
//! product := factor (('*' | '·' | '/') factor)*      (at most one non-constant factor)
//! factor  := '-' factor | number | ident | '(' term ')'
//! ```
//! Numbers are integers, decimals (`0.5`) or, through `/`, rationals.

use thiserror::Error;

use super::{Formula, LinExpr, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at offset {pos}")]
pub struct ArithParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ArithParseError> {
    const OPS: [(&str, &str); 22] = [
        ("<->", "<->"),
        ("<=", "<="),
        (">=", ">="),
        ("==", "=="),
        ("!=", "!="),
        ("&&", "&"),
        ("||", "|"),
        ("≤", "<="),
        ("≥", ">="),
        ("≠", "!="),
        ("∧", "&"),
        ("∨", "|"),
        ("¬", "!"),
        ("·", "*"),
        ("<", "<"),
        (">", ">"),
        ("=", "=="),
        ("!", "!"),
        ("&", "&"),
        ("|", "|"),
        ("+", "+"),
        ("-", "-"),
    ];
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        for (text, op) in OPS {
            if rest.starts_with(text) {
                out.push((i, Tok::Op(op)));
                i += text.len();
                continue 'outer;
            }
        }
        match c {
            '*' | '/' => {
                out.push((i, Tok::Op(if c == '*' { "*" } else { "/" })));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let n = rest.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(rest.len());
                out.push((i, Tok::Num(rest[..n].to_string())));
                i += n;
            }
            c if c.is_alphabetic() || c == '_' => {
                let n = rest
                    .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '.' || c == '@'))
                    .unwrap_or(rest.len());
                out.push((i, Tok::Ident(rest[..n].to_string())));
                i += n;
            }
            _ => {
                return Err(ArithParseError {
                    pos: i,
                    msg: format!("unexpected character '{c}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

type PResult<T> = Result<T, ArithParseError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ArithParseError {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn formula<S: Scalar>(&mut self) -> PResult<Formula<S>> {
        let a = self.or()?;
        if self.eat_op("<->") {
            let b = self.or()?;
            return Ok(Formula::iff(a, b));
        }
        Ok(a)
    }

    fn or<S: Scalar>(&mut self) -> PResult<Formula<S>> {
        let mut items = vec![self.and()?];
        while self.eat_op("|") {
            items.push(self.and()?);
        }
        Ok(Formula::or(items))
    }

    fn and<S: Scalar>(&mut self) -> PResult<Formula<S>> {
        let mut items = vec![self.unary()?];
        while self.eat_op("&") {
            items.push(self.unary()?);
        }
        Ok(Formula::and(items))
    }

    fn unary<S: Scalar>(&mut self) -> PResult<Formula<S>> {
        if self.eat_op("!") {
            return Ok(Formula::not(self.unary()?));
        }
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                let b = s == "true";
                self.pos += 1;
                return Ok(Formula::Const(b));
            }
            _ => {}
        }
        // A parenthesis may open either a term or a formula: try the comparison first.
        let save = self.pos;
        match self.comparison() {
            Ok(f) => Ok(f),
            Err(e) => {
                self.pos = save;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let f = self.formula()?;
                    self.expect(Tok::RParen)?;
                    Ok(f)
                } else {
                    Err(e)
                }
            }
        }
    }

    fn comparison<S: Scalar>(&mut self) -> PResult<Formula<S>> {
        let a = self.term()?;
        let op = match self.peek() {
            Some(Tok::Op(op @ ("<=" | "<" | ">=" | ">" | "==" | "!="))) => *op,
            _ => return self.err("expected a comparison"),
        };
        self.pos += 1;
        let b = self.term()?;
        Ok(match op {
            "<=" => Formula::le(&a, &b),
            "<" => Formula::lt(&a, &b),
            ">=" => Formula::ge(&a, &b),
            ">" => Formula::gt(&a, &b),
            "==" => Formula::eq(&a, &b),
            _ => Formula::ne(&a, &b),
        })
    }

    fn term<S: Scalar>(&mut self) -> PResult<LinExpr<S>> {
        let mut acc = self.product()?;
        loop {
            if self.eat_op("+") {
                acc = acc.add(&self.product()?);
            } else if self.eat_op("-") {
                acc = acc.sub(&self.product()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product<S: Scalar>(&mut self) -> PResult<LinExpr<S>> {
        let mut acc = self.factor()?;
        loop {
            let at = self.offset();
            if self.eat_op("*") {
                let f = self.factor()?;
                acc = if acc.is_constant() {
                    f.scale(&acc.constant)
                } else if f.is_constant() {
                    acc.scale(&f.constant)
                } else {
                    return Err(ArithParseError {
                        pos: at,
                        msg: "nonlinear product".into(),
                    });
                };
            } else if self.eat_op("/") {
                let f: LinExpr<S> = self.factor()?;
                if !f.is_constant() || f.constant.is_zero() {
                    return Err(ArithParseError {
                        pos: at,
                        msg: "division by a non-constant or zero".into(),
                    });
                }
                acc = acc.scale(&(S::one() / f.constant));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor<S: Scalar>(&mut self) -> PResult<LinExpr<S>> {
        if self.eat_op("-") {
            return Ok(self.factor()?.neg());
        }
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                let v = number::<S>(&n).ok_or_else(|| ArithParseError {
                    pos: self.offset(),
                    msg: format!("bad number '{n}'"),
                })?;
                self.pos += 1;
                Ok(LinExpr::constant(v))
            }
            Some(Tok::Ident(v)) if v != "true" && v != "false" => {
                self.pos += 1;
                Ok(LinExpr::var(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.err("expected a term"),
        }
    }
}

fn number<S: Scalar>(text: &str) -> Option<S> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() || frac.contains('.') {
        return None;
    }
    // The rational parser wants `n/d`.
    S::from_str_radix(&format!("{int}{frac}/1{}", "0".repeat(frac.len())), 10).ok()
}

fn parser(src: &str) -> PResult<Parser> {
    Ok(Parser {
        toks: lex(src)?,
        pos: 0,
        end: src.len(),
    })
}

pub fn parse_formula<S: Scalar>(src: &str) -> Result<Formula<S>, ArithParseError> {
    let mut p = parser(src)?;
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

pub fn parse_term<S: Scalar>(src: &str) -> Result<LinExpr<S>, ArithParseError> {
    let mut p = parser(src)?;
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}
