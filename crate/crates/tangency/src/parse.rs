//! Problem-file and expression parsing: a small recursive-descent parser
//! for the polynomial grammar (`3/2*x^2*y`, operators `+ - * / ^`,
//! parentheses) and derivation expressions (`x*d/dx - y*d/dy + d/dz`).

use std::collections::BTreeMap;
use std::fmt;

use num::BigInt;
use thiserror::Error;

use crate::algebra::{Frame, LocalElement, Poly, Q};
use crate::foliation::{Derivation, Distribution, SNCDivisor};
use crate::ideal::FGIdeal;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, message: message.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Semi,
    Equals,
    Bang,
    Colon,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
            }
            '\n' => {
                bump(&mut chars);
                out.push(Spanned { tok: Tok::Semi, line: l, col: co });
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Int(s.parse().expect("digits")),
                    line: l,
                    col: co,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '~' || c == '\'' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: l, col: co });
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Equals,
                    '!' => Tok::Bang,
                    ':' => Tok::Colon,
                    other => return err(l, co, format!("unexpected character '{other}'")),
                };
                bump(&mut chars);
                out.push(Spanned { tok, line: l, col: co });
            }
        }
    }
    Ok(out)
}

/// A parsed expression value: either a function or a vector field.
#[derive(Clone, Debug)]
enum Value {
    Scalar(LocalElement),
    Deriv(Vec<LocalElement>),
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    frame: Frame,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((0, 0))
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let (l, c) = self.here();
        match self.bump() {
            Some(t) if *t == tok => Ok(()),
            got => err(l, c, format!("expected {tok:?}, found {got:?}")),
        }
    }

    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = self.add(acc, rhs)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    let rhs = self.negate(rhs);
                    acc = self.add(acc, rhs)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = self.mul(acc, rhs)?;
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let (l, c) = self.here();
                    let rhs = self.factor()?;
                    let Value::Scalar(d) = rhs else {
                        return err(l, c, "cannot divide by a derivation");
                    };
                    if d.is_zero() || !d.is_unit() {
                        return err(l, c, "division requires a unit at the origin");
                    }
                    let inv = d.inverse().expect("checked unit");
                    acc = self.mul(acc, Value::Scalar(inv))?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                let v = self.factor()?;
                Ok(self.negate(v))
            }
            _ => {
                let base = self.atom()?;
                if let Some(Tok::Caret) = self.peek() {
                    self.bump();
                    let (l, c) = self.here();
                    let Some(Tok::Int(n)) = self.bump().cloned() else {
                        return err(l, c, "exponent must be a non-negative integer");
                    };
                    let Value::Scalar(s) = base else {
                        return err(l, c, "cannot exponentiate a derivation");
                    };
                    let n: u32 = n
                        .try_into()
                        .map_err(|_| ParseError { line: l, col: c, message: "exponent too large".into() })?;
                    let mut acc = LocalElement::one(&self.frame);
                    for _ in 0..n {
                        acc = acc.mul(&s);
                    }
                    return Ok(Value::Scalar(acc));
                }
                Ok(base)
            }
        }
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let (l, c) = self.here();
        match self.bump().cloned() {
            Some(Tok::Int(n)) => Ok(Value::Scalar(LocalElement::from_poly(Poly::constant(
                &self.frame,
                Q::from_integer(n),
            )))),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                // `d/dx` introduces the coordinate derivation
                if name == "d" {
                    if let Some(Tok::Slash) = self.peek() {
                        if let Some(Spanned { tok: Tok::Ident(dn), .. }) = self.toks.get(self.pos + 1)
                        {
                            if let Some(var) = dn.strip_prefix('d') {
                                if let Some(idx) = self.frame.index_of(var) {
                                    self.bump();
                                    self.bump();
                                    let mut coeffs =
                                        vec![LocalElement::zero(&self.frame); self.frame.dim()];
                                    coeffs[idx] = LocalElement::one(&self.frame);
                                    return Ok(Value::Deriv(coeffs));
                                }
                            }
                        }
                    }
                }
                match self.frame.index_of(&name) {
                    Some(idx) => Ok(Value::Scalar(LocalElement::from_poly(Poly::var(
                        &self.frame,
                        idx,
                    )))),
                    None => err(l, c, format!("unknown variable '{name}'")),
                }
            }
            got => err(l, c, format!("expected an expression, found {got:?}")),
        }
    }

    fn negate(&self, v: Value) -> Value {
        match v {
            Value::Scalar(s) => Value::Scalar(s.neg()),
            Value::Deriv(cs) => Value::Deriv(cs.into_iter().map(|c| c.neg()).collect()),
        }
    }

    fn add(&self, a: Value, b: Value) -> Result<Value, ParseError> {
        let (l, c) = self.here();
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x.add(&y))),
            (Value::Deriv(x), Value::Deriv(y)) => Ok(Value::Deriv(
                x.iter().zip(&y).map(|(a, b)| a.add(b)).collect(),
            )),
            _ => err(l, c, "cannot add a function to a derivation"),
        }
    }

    fn mul(&self, a: Value, b: Value) -> Result<Value, ParseError> {
        let (l, c) = self.here();
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x.mul(&y))),
            (Value::Scalar(x), Value::Deriv(y)) | (Value::Deriv(y), Value::Scalar(x)) => Ok(
                Value::Deriv(y.iter().map(|cy| cy.mul(&x)).collect()),
            ),
            _ => err(l, c, "cannot multiply two derivations"),
        }
    }
}

/// Parses a polynomial in the given frame.
pub fn parse_poly(text: &str, frame: &Frame) -> Result<Poly, ParseError> {
    let e = parse_local(text, frame)?;
    match e.as_poly() {
        Some(p) => Ok(p.clone()),
        None => err(1, 1, format!("expected a polynomial, got the quotient {e}")),
    }
}

/// Parses a local element (quotients by units allowed).
pub fn parse_local(text: &str, frame: &Frame) -> Result<LocalElement, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, frame: frame.clone() };
    let v = p.expr()?;
    let (l, c) = p.here();
    if p.pos < toks.len() {
        return err(l, c, "trailing input after expression");
    }
    match v {
        Value::Scalar(s) => Ok(s),
        Value::Deriv(_) => err(1, 1, "expected a function, found a derivation"),
    }
}

/// Parses a derivation expression in the given frame.
pub fn parse_derivation(text: &str, frame: &Frame) -> Result<Derivation, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks: &toks, pos: 0, frame: frame.clone() };
    let v = p.expr()?;
    let (l, c) = p.here();
    if p.pos < toks.len() {
        return err(l, c, "trailing input after expression");
    }
    match v {
        Value::Deriv(coeffs) => Ok(Derivation::new(frame, coeffs)),
        Value::Scalar(_) => err(1, 1, "expected a derivation, found a function"),
    }
}

/// A parsed problem: the foliated ideal sheaf data plus options.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub frame: Frame,
    pub theta: Distribution,
    pub ideal: FGIdeal,
    pub options: BTreeMap<String, String>,
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vars {}", self.frame)?;
        if !self.theta.is_empty() {
            let gens: Vec<String> =
                self.theta.generators().iter().map(|g| g.to_string()).collect();
            write!(f, "; theta {}", gens.join(", "))?;
        }
        let gens: Vec<String> = self.ideal.generators().iter().map(|g| g.to_string()).collect();
        write!(f, "; ideal {}", gens.join(", "))?;
        if !self.options.is_empty() {
            let opts: Vec<String> =
                self.options.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "; options {}", opts.join(" "))?;
        }
        Ok(())
    }
}

/// Parses a problem file: `vars`, `theta`, `ideal` and `options`
/// statements separated by semicolons or newlines; `!` after a variable
/// name marks a divisor component; `#` starts a comment.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ParseError> {
    let toks = lex(text)?;
    // split into statements on Semi
    let mut statements: Vec<&[Spanned]> = Vec::new();
    let mut start = 0usize;
    for (i, s) in toks.iter().enumerate() {
        if s.tok == Tok::Semi {
            if i > start {
                statements.push(&toks[start..i]);
            }
            start = i + 1;
        }
    }
    if start < toks.len() {
        statements.push(&toks[start..]);
    }

    let mut frame: Option<Frame> = None;
    let mut theta_exprs: Vec<&[Spanned]> = Vec::new();
    let mut ideal_exprs: Vec<&[Spanned]> = Vec::new();
    let mut options = BTreeMap::new();
    let mut saw_ideal_stmt = false;

    for stmt in statements {
        let head = &stmt[0];
        let Tok::Ident(kw) = &head.tok else {
            return err(head.line, head.col, "expected a statement keyword");
        };
        match kw.as_str() {
            "vars" => {
                let mut vars = Vec::new();
                let mut i = 1;
                while i < stmt.len() {
                    let Tok::Ident(name) = &stmt[i].tok else {
                        return err(stmt[i].line, stmt[i].col, "expected a variable name");
                    };
                    let mut exceptional = false;
                    if let Some(Spanned { tok: Tok::Bang, .. }) = stmt.get(i + 1) {
                        exceptional = true;
                        i += 1;
                    }
                    vars.push(crate::algebra::VarInfo { name: name.clone(), exceptional });
                    i += 1;
                    if let Some(Spanned { tok: Tok::Comma, .. }) = stmt.get(i) {
                        i += 1;
                    }
                }
                if vars.is_empty() {
                    return err(head.line, head.col, "vars statement declares no variables");
                }
                frame = Some(Frame::new(vars));
            }
            "theta" => {
                for part in split_commas(&stmt[1..]) {
                    theta_exprs.push(part);
                }
            }
            "ideal" => {
                saw_ideal_stmt = true;
                for part in split_commas(&stmt[1..]) {
                    ideal_exprs.push(part);
                }
            }
            "options" => {
                let mut i = 1;
                while i + 2 < stmt.len() + 1 {
                    let Tok::Ident(key) = &stmt[i].tok else {
                        return err(stmt[i].line, stmt[i].col, "expected an option name");
                    };
                    if stmt.get(i + 1).map(|s| &s.tok) != Some(&Tok::Equals) {
                        return err(stmt[i].line, stmt[i].col, "expected '=' after option name");
                    }
                    let mut value = match stmt.get(i + 2).map(|s| &s.tok) {
                        Some(Tok::Ident(v)) => v.clone(),
                        Some(Tok::Int(n)) => n.to_string(),
                        _ => return err(stmt[i].line, stmt[i].col, "expected an option value"),
                    };
                    i += 3;
                    // composite values like `jet:8`
                    if stmt.get(i).map(|s| &s.tok) == Some(&Tok::Colon) {
                        match stmt.get(i + 1).map(|s| &s.tok) {
                            Some(Tok::Int(n)) => {
                                value = format!("{value}:{n}");
                                i += 2;
                            }
                            _ => return err(stmt[i].line, stmt[i].col, "expected a number after ':'"),
                        }
                    }
                    options.insert(key.clone(), value);
                }
            }
            other => return err(head.line, head.col, format!("unknown statement '{other}'")),
        }
    }

    let Some(frame) = frame else {
        return err(1, 1, "missing vars statement");
    };
    if !saw_ideal_stmt || ideal_exprs.is_empty() {
        return err(1, 1, "ideal required");
    }
    let parse_slice = |slice: &[Spanned], what: &str| -> Result<Value, ParseError> {
        let mut p = Parser { toks: slice, pos: 0, frame: frame.clone() };
        let v = p.expr()?;
        if p.pos < slice.len() {
            let s = &slice[p.pos];
            return err(s.line, s.col, format!("trailing input in {what}"));
        }
        Ok(v)
    };
    let mut theta_gens = Vec::new();
    for e in theta_exprs {
        match parse_slice(e, "theta")? {
            Value::Deriv(coeffs) => theta_gens.push(Derivation::new(&frame, coeffs)),
            Value::Scalar(_) => {
                return err(e[0].line, e[0].col, "theta entries must be derivations")
            }
        }
    }
    let mut ideal_gens = Vec::new();
    for e in ideal_exprs {
        match parse_slice(e, "ideal")? {
            Value::Scalar(s) => match s.as_poly() {
                Some(p) => ideal_gens.push(p.clone()),
                None => {
                    return err(e[0].line, e[0].col, "ideal generators must be polynomials")
                }
            },
            Value::Deriv(_) => {
                return err(e[0].line, e[0].col, "ideal entries must be polynomials")
            }
        }
    }
    let divisor = SNCDivisor::from_frame(&frame);
    for d in &theta_gens {
        if !d.is_tangent_to(&divisor) {
            return err(1, 1, format!("derivation {d} is not tangent to the declared divisor"));
        }
    }
    let theta = Distribution::new(&frame, theta_gens, divisor);
    let ideal = FGIdeal::new(&frame, ideal_gens);
    if ideal.is_zero() {
        return err(1, 1, "ideal required");
    }
    Ok(ProblemFile { frame, theta, ideal, options })
}

fn split_commas(toks: &[Spanned]) -> Vec<&[Spanned]> {
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut depth = 0i32;
    for (i, s) in toks.iter().enumerate() {
        match s.tok {
            Tok::LParen => depth += 1,
            Tok::RParen => depth -= 1,
            Tok::Comma if depth == 0 => {
                if i > start {
                    out.push(&toks[start..i]);
                }
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < toks.len() {
        out.push(&toks[start..]);
    }
    out
}
