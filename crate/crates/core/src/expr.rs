//! Arithmetic mini-grammar for potentials and test functions.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | func '(' expr ')' | '(' expr ')'
//! func  := exp | abs
//! ```
//!
//! Free variables are declared when parsing (`x`, or `t` and `x`); any other
//! name must be supplied as a constant and is folded in at parse time.
//! Exponents must not depend on the free variables, which keeps every
//! expression symbolically differentiable.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Base raised to a variable-free exponent.
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str], constants: &BTreeMap<String, f64>) -> Result<Self> {
        let mut p = Parser {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            vars,
            constants,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Parses an expression in the single variable `x`.
    pub fn parse_x(src: &str) -> Result<Self> {
        Self::parse(src, &["x"], &BTreeMap::new())
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, k) => {
                let base = a.eval(vars);
                if k.fract() == 0.0 && k.abs() < 64.0 {
                    base.powi(*k as i32)
                } else {
                    base.powf(*k)
                }
            }
            Expr::Exp(a) => a.eval(vars).exp(),
            Expr::Abs(a) => a.eval(vars).abs(),
        }
    }

    /// Symbolic derivative with respect to variable slot `var`.
    ///
    /// `abs` differentiates to `sign`, expressed as `u / |u|`.
    pub fn diff(&self, var: usize) -> Expr {
        use Expr::*;
        let d = match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => Neg(Box::new(a.diff(var))),
            Add(a, b) => Add(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Sub(a, b) => Sub(Box::new(a.diff(var)), Box::new(b.diff(var))),
            Mul(a, b) => Add(
                Box::new(Mul(Box::new(a.diff(var)), b.clone())),
                Box::new(Mul(a.clone(), Box::new(b.diff(var)))),
            ),
            Div(a, b) => Div(
                Box::new(Sub(
                    Box::new(Mul(Box::new(a.diff(var)), b.clone())),
                    Box::new(Mul(a.clone(), Box::new(b.diff(var)))),
                )),
                Box::new(Pow(b.clone(), 2.0)),
            ),
            Pow(a, k) => Mul(
                Box::new(Mul(Box::new(Num(*k)), Box::new(Pow(a.clone(), k - 1.0)))),
                Box::new(a.diff(var)),
            ),
            Exp(a) => Mul(Box::new(Exp(a.clone())), Box::new(a.diff(var))),
            Abs(a) => Mul(
                Box::new(Div(a.clone(), Box::new(Abs(a.clone())))),
                Box::new(a.diff(var)),
            ),
        };
        d.simplify()
    }

    fn simplify(self) -> Expr {
        use Expr::*;
        match self {
            Neg(a) => match a.simplify() {
                Num(v) => Num(-v),
                Neg(b) => *b,
                s => Neg(Box::new(s)),
            },
            Add(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x + y),
                (Num(0.0), e) | (e, Num(0.0)) => e,
                (x, y) => Add(Box::new(x), Box::new(y)),
            },
            Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x - y),
                (e, Num(0.0)) => e,
                (Num(0.0), e) => Neg(Box::new(e)),
                (x, y) => Sub(Box::new(x), Box::new(y)),
            },
            Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x * y),
                (Num(0.0), _) | (_, Num(0.0)) => Num(0.0),
                (Num(1.0), e) | (e, Num(1.0)) => e,
                (x, y) => Mul(Box::new(x), Box::new(y)),
            },
            Div(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x / y),
                (Num(0.0), _) => Num(0.0),
                (e, Num(1.0)) => e,
                (x, y) => Div(Box::new(x), Box::new(y)),
            },
            Pow(a, k) => match a.simplify() {
                _ if k == 0.0 => Num(1.0),
                e if k == 1.0 => e,
                Num(x) => Num(x.powf(k)),
                e => Pow(Box::new(e), k),
            },
            Exp(a) => match a.simplify() {
                Num(x) => Num(x.exp()),
                e => Exp(Box::new(e)),
            },
            Abs(a) => match a.simplify() {
                Num(x) => Num(x.abs()),
                e => Abs(Box::new(e)),
            },
            e => e,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Expr::Num(_))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "${i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a} ^ {k})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    vars: &'a [&'a str],
    constants: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Expr {
            column: self.pos + 1,
            message: format!("{} in `{}`", message.into(), self.src),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let start = self.pos;
            let exponent = self.unary()?.simplify();
            match exponent {
                Expr::Num(k) => Ok(Expr::Pow(Box::new(base), k)),
                _ => {
                    self.pos = start;
                    Err(self.err("exponent must not depend on the free variables"))
                }
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let name = self.ident();
                if self.peek() == Some('(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.err("expected `)` after function argument"));
                    }
                    return match name.as_str() {
                        "exp" => Ok(Expr::Exp(Box::new(arg))),
                        "abs" => Ok(Expr::Abs(Box::new(arg))),
                        _ => Err(self.err(format!("unknown function `{name}`"))),
                    };
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(i));
                }
                if let Some(v) = self.constants.get(&name) {
                    return Ok(Expr::Num(*v));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                Err(self.err(format!("unknown name `{name}`")))
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos].1;
            if c.is_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.chars[start..self.pos].iter().map(|c| c.1).collect()
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos].1;
            let exp_sign =
                (c == '-' || c == '+') && self.pos > start && matches!(self.chars[self.pos - 1].1, 'e' | 'E');
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| self.err(format!("malformed number `{text}`")))
    }
}
