//! Bivariate expression front-end: parsing, evaluation and exact mixed
//! partial derivatives.
//!
//! Grammar (EBNF):
//! ```text
//! expr   := term { ("+" | "-") term }
//! term   := unary { ("*" | "/") unary }
//! unary  := "-" unary | power
//! power  := atom [ "^" exponent ]
//! exponent := [ "-" ] number | "(" [ "-" ] number ")"
//! atom   := number | "x" | "y" | ident "(" expr ")" | "(" expr ")"
//! ident  := "sin" | "cos" | "exp" | "log" | "sqrt"
//! ```
//! Exponents are constants, so derivatives stay inside the grammar.
//! Differentiation is structural (no finite differences): the derivative
//! of an AST is another AST, exact up to floating-point rounding.

use std::collections::BTreeMap;
use std::fmt;

/// Maximum supported total differentiation order.
pub const MAX_DERIV_DEPTH: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// base raised to a constant exponent
    Pow(Box<Expr>, f64),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprError {
    /// byte offset of the offending token
    Syntax { offset: usize, message: String },
    UnknownIdentifier { offset: usize, name: String },
    EmptyInput,
    /// log of a non-positive value, division by zero, sqrt of a negative
    Domain { message: String },
    DepthExceeded { requested: u32 },
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Syntax { offset, message } => {
                write!(f, "syntax error at offset {offset}: {message}")
            }
            ExprError::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier `{name}` at offset {offset}")
            }
            ExprError::EmptyInput => write!(f, "empty input"),
            ExprError::Domain { message } => write!(f, "domain error: {message}"),
            ExprError::DepthExceeded { requested } => {
                write!(f, "differentiation depth {requested} exceeds supported maximum {MAX_DERIV_DEPTH}")
            }
        }
    }
}

impl std::error::Error for ExprError {}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

pub fn parse(source: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.bytes.len() {
        return Err(ExprError::EmptyInput);
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(ExprError::Syntax {
            offset: p.pos,
            message: format!("unexpected `{}`", &p.src[p.pos..p.pos + 1]),
        });
    }
    Ok(e)
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

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.const_exponent()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn const_exponent(&mut self) -> Result<f64, ExprError> {
        let parenthesized = self.peek() == Some(b'(');
        if parenthesized {
            self.pos += 1;
        }
        let mut sign = 1.0;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            sign = -1.0;
        }
        let value = sign * self.number()?;
        if parenthesized {
            if self.peek() != Some(b')') {
                return Err(ExprError::Syntax {
                    offset: self.pos,
                    message: "expected `)` after constant exponent".into(),
                });
            }
            self.pos += 1;
        }
        Ok(value)
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // exponent suffix like 1.5e-3
        if self.pos > start && self.pos < self.bytes.len() && (self.bytes[self.pos] | 0x20) == b'e'
        {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        if self.pos == start {
            return Err(ExprError::Syntax {
                offset: start,
                message: "expected a number".into(),
            });
        }
        self.src[start..self.pos].parse::<f64>().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{}`", &self.src[start..self.pos]),
        })
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(ExprError::Syntax {
                offset: self.pos,
                message: "unexpected end of input".into(),
            }),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(ExprError::Syntax {
                        offset: self.pos,
                        message: "expected `)`".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match name {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    "sin" | "cos" | "exp" | "log" | "sqrt" => {
                        if self.peek() != Some(b'(') {
                            return Err(ExprError::Syntax {
                                offset: self.pos,
                                message: format!("expected `(` after `{name}`"),
                            });
                        }
                        self.pos += 1;
                        let arg = Box::new(self.expr()?);
                        if self.peek() != Some(b')') {
                            return Err(ExprError::Syntax {
                                offset: self.pos,
                                message: "expected `)`".into(),
                            });
                        }
                        self.pos += 1;
                        Ok(match name {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            "exp" => Expr::Exp(arg),
                            "log" => Expr::Log(arg),
                            _ => Expr::Sqrt(arg),
                        })
                    }
                    _ => Err(ExprError::UnknownIdentifier {
                        offset: start,
                        name: name.to_string(),
                    }),
                }
            }
            Some(c) => Err(ExprError::Syntax {
                offset: self.pos,
                message: format!("unexpected `{}`", c as char),
            }),
        }
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ExprError> {
        parse(source)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64, ExprError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Y => y,
            Expr::Add(a, b) => a.eval(x, y)? + b.eval(x, y)?,
            Expr::Sub(a, b) => a.eval(x, y)? - b.eval(x, y)?,
            Expr::Mul(a, b) => a.eval(x, y)? * b.eval(x, y)?,
            Expr::Div(a, b) => {
                let d = b.eval(x, y)?;
                if d == 0.0 {
                    return Err(ExprError::Domain {
                        message: "division by zero".into(),
                    });
                }
                a.eval(x, y)? / d
            }
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Pow(a, e) => {
                let base = a.eval(x, y)?;
                if base < 0.0 && e.fract() != 0.0 {
                    return Err(ExprError::Domain {
                        message: format!("negative base {base} with fractional exponent {e}"),
                    });
                }
                if base == 0.0 && *e < 0.0 {
                    return Err(ExprError::Domain {
                        message: "zero base with negative exponent".into(),
                    });
                }
                base.powf(*e)
            }
            Expr::Sin(a) => a.eval(x, y)?.sin(),
            Expr::Cos(a) => a.eval(x, y)?.cos(),
            Expr::Exp(a) => a.eval(x, y)?.exp(),
            Expr::Log(a) => {
                let v = a.eval(x, y)?;
                if v <= 0.0 {
                    return Err(ExprError::Domain {
                        message: format!("log of non-positive value {v}"),
                    });
                }
                v.ln()
            }
            Expr::Sqrt(a) => {
                let v = a.eval(x, y)?;
                if v < 0.0 {
                    return Err(ExprError::Domain {
                        message: format!("sqrt of negative value {v}"),
                    });
                }
                v.sqrt()
            }
        };
        Ok(v)
    }

    /// Structural derivative with respect to `var`, lightly simplified.
    pub fn diff(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::X => Expr::Const(if var == Var::X { 1.0 } else { 0.0 }),
            Expr::Y => Expr::Const(if var == Var::Y { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b' / b^2
                sub(
                    div(a.diff(var), (**b).clone()),
                    div(
                        mul((**a).clone(), b.diff(var)),
                        Expr::Pow(Box::new((**b).clone()), 2.0),
                    ),
                )
            }
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Pow(a, e) => {
                if *e == 0.0 {
                    Expr::Const(0.0)
                } else {
                    // c * a^(c-1) * a'
                    let power = if *e == 1.0 {
                        Expr::Const(1.0)
                    } else if *e == 2.0 {
                        (**a).clone()
                    } else {
                        Expr::Pow(Box::new((**a).clone()), e - 1.0)
                    };
                    mul(mul(Expr::Const(*e), power), a.diff(var))
                }
            }
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.diff(var)),
            Expr::Cos(a) => neg(mul(Expr::Sin(a.clone()), a.diff(var))),
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.diff(var)),
            Expr::Log(a) => div(a.diff(var), (**a).clone()),
            Expr::Sqrt(a) => div(
                a.diff(var),
                mul(Expr::Const(2.0), Expr::Sqrt(a.clone())),
            ),
        }
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, _) if is_zero(&a) => b,
        (_, _) if is_zero(&b) => a,
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, _) if is_zero(&b) => a,
        (_, _) if is_zero(&a) => neg(b),
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return Expr::Const(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        return Expr::Const(x * y);
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return Expr::Const(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => write!(f, "x"),
            Expr::Y => write!(f, "y"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, e) => write!(f, "({a}^({e}))"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// d^p/dx^p d^q/dy^q f at (x, y), computed by structural differentiation.
pub fn mixed_partial(f: &Expr, p: u32, q: u32, x: f64, y: f64) -> Result<f64, ExprError> {
    if p + q > MAX_DERIV_DEPTH {
        return Err(ExprError::DepthExceeded { requested: p + q });
    }
    let mut e = f.clone();
    for _ in 0..p {
        e = e.diff(Var::X);
    }
    for _ in 0..q {
        e = e.diff(Var::Y);
    }
    e.eval(x, y)
}

/// All mixed partials of `f` at `(0, c0)` up to total order `n`.
#[derive(Debug, Clone)]
pub struct DerivTable {
    pub n: u32,
    entries: BTreeMap<(u32, u32), f64>,
}

impl DerivTable {
    pub fn entry(&self, p: u32, q: u32) -> f64 {
        *self.entries.get(&(p, q)).unwrap_or(&0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &f64)> {
        self.entries.iter()
    }
}

pub fn derivative_table(f: &Expr, n: u32, c0: f64) -> Result<DerivTable, ExprError> {
    if n > MAX_DERIV_DEPTH {
        return Err(ExprError::DepthExceeded { requested: n });
    }
    let mut entries = BTreeMap::new();
    // differentiate incrementally: row p of x-derivatives, then y-derivatives
    let mut fx = f.clone();
    for p in 0..=n {
        let mut fxy = fx.clone();
        for q in 0..=(n - p) {
            entries.insert((p, q), fxy.eval(0.0, c0)?);
            fxy = fxy.diff(Var::Y);
        }
        fx = fx.diff(Var::X);
    }
    Ok(DerivTable { n, entries })
}

/// Sampled lower estimate of the uniform derivative bound M over
/// `[0,a] x [c0-b, c0+b]`, over all partials of total order <= n.
/// A grid sample can only underestimate the true supremum.
pub fn estimate_bound_m(
    f: &Expr,
    n: u32,
    a: f64,
    c0: f64,
    b: f64,
    grid: u32,
) -> Result<f64, ExprError> {
    assert!(a > 0.0 && b > 0.0 && grid >= 2);
    // precompute the derivative ASTs once
    let mut derivs = Vec::new();
    let mut fx = f.clone();
    for p in 0..=n {
        let mut fxy = fx.clone();
        for _q in 0..=(n - p) {
            derivs.push(fxy.clone());
            fxy = fxy.diff(Var::Y);
        }
        fx = fx.diff(Var::X);
    }
    let mut max = 0.0f64;
    for ix in 0..grid {
        let x = a * ix as f64 / (grid - 1) as f64;
        for iy in 0..grid {
            let y = c0 - b + 2.0 * b * iy as f64 / (grid - 1) as f64;
            for d in &derivs {
                let v = d.eval(x, y)?.abs();
                if v > max {
                    max = v;
                }
            }
        }
    }
    Ok(max)
}
