//! Scalar expressions over named chart variables: parsing, evaluation,
//! exact symbolic differentiation and capture-free substitution.
//!
//! The grammar (EBNF, documented in the repo README):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := power (("*" | "/") power)*
//! power  := neg ("^" power)?          // right associative
//! neg    := "-" neg | atom            // unary minus binds tighter than ^
//! atom   := number | ident ("(" expr ("," expr)* ")")? | "(" expr ")"
//! number := digits ("." digits)? (("e"|"E") ("+"|"-")? digits)?
//! ```
//!
//! Identifiers resolve against a declared variable list and a constants set;
//! anything else is an unknown-identifier error. Recognized functions:
//! `exp`, `log`, `sin`, `cos`, `tan`, `sqrt`, `abs`, `pow(x, y)`.

use std::collections::HashMap;
use std::fmt;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Immutable expression tree. Values are IEEE doubles; evaluation is pure,
/// so shared concurrent reads are safe.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Const(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn one() -> Expr {
        Expr::Num(1.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }
}

// Smart constructors: constant folding plus 0/1 identities only, so that
// derivative output stays predictable (no general algebraic rewriting).

pub fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if a.is_zero() || b.is_zero() => Expr::zero(),
        _ if a.is_one() => b,
        _ if b.is_one() => a,
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) if *y != 0.0 => Expr::Num(x / y),
        _ if a.is_zero() && !b.is_zero() => Expr::zero(),
        _ if b.is_one() => a,
        _ => Expr::Bin(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) if (*x > 0.0 || y.fract() == 0.0) => Expr::Num(x.powf(*y)),
        _ if b.is_zero() => Expr::one(),
        _ if b.is_one() => a,
        _ => Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(-x),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

pub fn call(f: Func, arg: Expr) -> Expr {
    Expr::Call(f, Box::new(arg))
}

/// Variable/constant bindings used during evaluation. Variable lookup is a
/// linear scan; chart dimensions are single digits so this beats hashing.
#[derive(Debug, Clone, Copy)]
pub struct Bindings<'a> {
    pub names: &'a [String],
    pub values: &'a [f64],
    pub constants: &'a HashMap<String, f64>,
}

impl<'a> Bindings<'a> {
    pub fn new(
        names: &'a [String],
        values: &'a [f64],
        constants: &'a HashMap<String, f64>,
    ) -> Self {
        debug_assert_eq!(names.len(), values.len());
        Bindings {
            names,
            values,
            constants,
        }
    }

    fn var(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

impl Expr {
    /// Evaluates at a point. Deterministic: identical bindings give a
    /// bit-identical result. Domain violations (log of non-positive, sqrt of
    /// negative, division by zero, fractional power of a negative base) are
    /// errors, never NaN.
    pub fn eval(&self, b: &Bindings) -> Result<f64, Error> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => b
                .var(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone())),
            Expr::Const(name) => b
                .constants
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnboundVariable(name.clone())),
            Expr::Neg(e) => Ok(-e.eval(b)?),
            Expr::Bin(op, l, r) => {
                let x = l.eval(b)?;
                let y = r.eval(b)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(Error::Domain("division by zero".into()))
                        } else {
                            Ok(x / y)
                        }
                    }
                    BinOp::Pow => {
                        if x < 0.0 && y.fract() != 0.0 {
                            Err(Error::Domain(format!(
                                "fractional power {y} of negative base {x}"
                            )))
                        } else if x == 0.0 && y < 0.0 {
                            Err(Error::Domain("zero raised to a negative power".into()))
                        } else {
                            Ok(x.powf(y))
                        }
                    }
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(b)?;
                match f {
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(Error::Domain(format!("log of non-positive value {x}")))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => Ok(x.tan()),
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(Error::Domain(format!("sqrt of negative value {x}")))
                        } else {
                            Ok(x.sqrt())
                        }
                    }
                    Func::Abs => Ok(x.abs()),
                }
            }
        }
    }

    /// Exact symbolic partial derivative with respect to `var`.
    /// Constants and other variables differentiate to the zero literal.
    pub fn differentiate(&self, var: &str) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => Expr::zero(),
            Expr::Var(name) => {
                if name == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(e) => neg(e.differentiate(var)),
            Expr::Bin(op, l, r) => {
                let dl = l.differentiate(var);
                let dr = r.differentiate(var);
                match op {
                    BinOp::Add => add(dl, dr),
                    BinOp::Sub => sub(dl, dr),
                    BinOp::Mul => add(mul(dl, (**r).clone()), mul((**l).clone(), dr)),
                    BinOp::Div => {
                        // (l/r)' = l'/r - l r'/r^2
                        sub(
                            div(dl, (**r).clone()),
                            div(mul((**l).clone(), dr), pow((**r).clone(), Expr::num(2.0))),
                        )
                    }
                    BinOp::Pow => {
                        if let Expr::Num(n) = **r {
                            // l^n with numeric n: n l^(n-1) l'
                            mul(
                                mul(Expr::num(n), pow((**l).clone(), Expr::num(n - 1.0))),
                                dl,
                            )
                        } else {
                            // l^r = exp(r log l):  l^r (r' log l + r l'/l)
                            mul(
                                pow((**l).clone(), (**r).clone()),
                                add(
                                    mul(dr, call(Func::Log, (**l).clone())),
                                    div(mul((**r).clone(), dl), (**l).clone()),
                                ),
                            )
                        }
                    }
                }
            }
            Expr::Call(f, arg) => {
                let da = arg.differentiate(var);
                let a = (**arg).clone();
                let outer = match f {
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(Expr::one(), a),
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Tan => div(Expr::one(), pow(call(Func::Cos, a), Expr::num(2.0))),
                    Func::Sqrt => div(Expr::one(), mul(Expr::num(2.0), call(Func::Sqrt, a))),
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                };
                mul(outer, da)
            }
        }
    }

    /// Capture-free substitution of variables by expressions.
    /// `evaluate(substitute(e, b), x) == evaluate(e, b(x))`.
    pub fn substitute(&self, bindings: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) => self.clone(),
            Expr::Var(name) => bindings.get(name).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => neg(e.substitute(bindings)),
            Expr::Bin(op, l, r) => {
                let ls = l.substitute(bindings);
                let rs = r.substitute(bindings);
                match op {
                    BinOp::Add => add(ls, rs),
                    BinOp::Sub => sub(ls, rs),
                    BinOp::Mul => mul(ls, rs),
                    BinOp::Div => div(ls, rs),
                    BinOp::Pow => pow(ls, rs),
                }
            }
            Expr::Call(f, arg) => call(*f, arg.substitute(bindings)),
        }
    }

    /// Names of all variables referenced by the expression.
    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Var(name) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            Expr::Neg(e) => e.variables(out),
            Expr::Bin(_, l, r) => {
                l.variables(out);
                r.variables(out);
            }
            Expr::Call(_, arg) => arg.variables(out),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (round-trips through the parser to a semantically equal AST).
// ---------------------------------------------------------------------------

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Bin(BinOp::Pow, ..) => 3,
        Expr::Neg(_) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(n) | Expr::Const(n) => write!(f, "{n}"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, 4)
            }
            Expr::Bin(op, l, r) => match op {
                BinOp::Add => {
                    wrap(f, l, 1)?;
                    write!(f, " + ")?;
                    wrap(f, r, 2)
                }
                BinOp::Sub => {
                    wrap(f, l, 1)?;
                    write!(f, " - ")?;
                    wrap(f, r, 2)
                }
                BinOp::Mul => {
                    wrap(f, l, 2)?;
                    write!(f, "*")?;
                    wrap(f, r, 3)
                }
                BinOp::Div => {
                    wrap(f, l, 2)?;
                    write!(f, "/")?;
                    wrap(f, r, 4)
                }
                BinOp::Pow => {
                    // ^ is right associative and unary minus binds tighter,
                    // so the base must be atomic-or-tighter.
                    wrap(f, l, 4)?;
                    write!(f, "^")?;
                    wrap(f, r, 3)
                }
            },
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
    consts: &'a [String],
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: msg.into(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = add(lhs, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, Error> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = mul(lhs, self.power()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = div(lhs, self.power()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, Error> {
        let base = self.negation()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.power()?; // right associative
            Ok(pow(base, exponent))
        } else {
            Ok(base)
        }
    }

    fn negation(&mut self) -> Result<Expr, Error> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            Ok(neg(self.negation()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, Error> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, Error> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] | 32) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // 'e' belongs to an identifier or is junk
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Parse {
                offset: start,
                message: format!("bad number literal '{text}'"),
            })
    }

    fn identifier(&mut self) -> Result<Expr, Error> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let first = self.expr()?;
            let out = match name.as_str() {
                "exp" => call(Func::Exp, first),
                "log" => call(Func::Log, first),
                "sin" => call(Func::Sin, first),
                "cos" => call(Func::Cos, first),
                "tan" => call(Func::Tan, first),
                "sqrt" => call(Func::Sqrt, first),
                "abs" => call(Func::Abs, first),
                "pow" => {
                    if !self.eat(b',') {
                        return Err(self.err("pow takes two arguments"));
                    }
                    let second = self.expr()?;
                    pow(first, second)
                }
                _ => {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("unknown function '{name}'"),
                    })
                }
            };
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            Ok(out)
        } else if self.vars.contains(&name) {
            Ok(Expr::Var(name))
        } else if self.consts.contains(&name) {
            Ok(Expr::Const(name))
        } else {
            Err(Error::UnknownIdentifier {
                name,
                offset: start,
            })
        }
    }
}

/// Parses `text` against a declared variable list and constants set.
pub fn parse(text: &str, chart_vars: &[String], constants: &[String]) -> Result<Expr, Error> {
    if text.trim().is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars: chart_vars,
        consts: constants,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}
