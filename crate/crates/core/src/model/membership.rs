//! Membership-function expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor ('*' factor)*
//! factor  := '-' factor | power
//! power   := atom ('^2')?
//! atom    := number | 'x[' int ']' | ('sin' | 'cos') '(' expr ')'
//!          | 'one_minus(' int ')' | '(' expr ')'
//! ```
//!
//! `one_minus(k)` evaluates to `1 - h_k` where `h_k` is the sibling
//! membership with 0-based index `k` in the same mode.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("membership expression error at byte {position}: {message}")]
pub struct GrammarError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    State(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Square(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    OneMinus(usize),
}

/// A parsed membership function of the owning subsystem's state.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFn {
    pub expr: Expr,
}

impl MembershipFn {
    pub fn parse(src: &str) -> Result<Self, GrammarError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let expr = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(Self { expr })
    }

    /// Largest state index referenced, if any.
    pub fn max_state_index(&self) -> Option<usize> {
        fn walk(e: &Expr, acc: &mut Option<usize>) {
            match e {
                Expr::State(k) => *acc = Some(acc.map_or(*k, |a| a.max(*k))),
                Expr::Neg(a) | Expr::Square(a) | Expr::Sin(a) | Expr::Cos(a) => walk(a, acc),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                    walk(a, acc);
                    walk(b, acc);
                }
                Expr::Const(_) | Expr::OneMinus(_) => {}
            }
        }
        let mut acc = None;
        walk(&self.expr, &mut acc);
        acc
    }

    /// Sibling indices referenced through `one_minus`.
    pub fn sibling_refs(&self) -> Vec<usize> {
        fn walk(e: &Expr, acc: &mut Vec<usize>) {
            match e {
                Expr::OneMinus(k) => acc.push(*k),
                Expr::Neg(a) | Expr::Square(a) | Expr::Sin(a) | Expr::Cos(a) => walk(a, acc),
                Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                    walk(a, acc);
                    walk(b, acc);
                }
                Expr::Const(_) | Expr::State(_) => {}
            }
        }
        let mut acc = Vec::new();
        walk(&self.expr, &mut acc);
        acc
    }
}

/// Evaluates membership `index` of a family at `state`.
///
/// Sibling references are resolved recursively; cycles are reported as `None`.
pub fn eval_family_member(family: &[MembershipFn], index: usize, state: &[f64]) -> Option<f64> {
    fn go(family: &[MembershipFn], e: &Expr, state: &[f64], depth: usize) -> Option<f64> {
        if depth > family.len() {
            return None;
        }
        Some(match e {
            Expr::Const(c) => *c,
            Expr::State(k) => *state.get(*k)?,
            Expr::Neg(a) => -go(family, a, state, depth)?,
            Expr::Add(a, b) => go(family, a, state, depth)? + go(family, b, state, depth)?,
            Expr::Sub(a, b) => go(family, a, state, depth)? - go(family, b, state, depth)?,
            Expr::Mul(a, b) => go(family, a, state, depth)? * go(family, b, state, depth)?,
            Expr::Square(a) => {
                let v = go(family, a, state, depth)?;
                v * v
            }
            Expr::Sin(a) => go(family, a, state, depth)?.sin(),
            Expr::Cos(a) => go(family, a, state, depth)?.cos(),
            Expr::OneMinus(k) => 1.0 - go(family, &family.get(*k)?.expr, state, depth + 1)?,
        })
    }
    go(family, &family.get(index)?.expr, state, 0)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::State(k) => write!(f, "x[{k}]"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Square(a) => write!(f, "({a})^2"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::OneMinus(k) => write!(f, "one_minus({k})"),
        }
    }
}

impl fmt::Display for MembershipFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> GrammarError {
        GrammarError { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), GrammarError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{tok}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr, GrammarError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, GrammarError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, GrammarError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.expect("2").map_err(|_| self.err("only '^2' is supported"))?;
            return Ok(Expr::Square(Box::new(base)));
        }
        Ok(base)
    }

    fn index(&mut self) -> Result<usize, GrammarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GrammarError { position: start, message: "expected index".into() })
    }

    fn number(&mut self) -> Result<f64, GrammarError> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        std::str::from_utf8(&s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GrammarError { position: start, message: "malformed number".into() })
    }

    fn atom(&mut self) -> Result<Expr, GrammarError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(_) => {
                if self.eat("x[") {
                    let k = self.index()?;
                    self.expect("]")?;
                    Ok(Expr::State(k))
                } else if self.eat("sin(") {
                    let e = self.expr()?;
                    self.expect(")")?;
                    Ok(Expr::Sin(Box::new(e)))
                } else if self.eat("cos(") {
                    let e = self.expr()?;
                    self.expect(")")?;
                    Ok(Expr::Cos(Box::new(e)))
                } else if self.eat("one_minus(") {
                    let k = self.index()?;
                    self.expect(")")?;
                    Ok(Expr::OneMinus(k))
                } else {
                    Err(self.err("unknown token"))
                }
            }
            None => Err(self.err("unexpected end of expression")),
        }
    }
}
