//! Coefficient expressions: a small analytic expression language over one
//! real-or-complex variable `x`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          // right-associative
//! primary := number | 'i' | 'pi' | 'x' | name | func '(' expr ')' | '(' expr ')'
//! func    := exp | sin | cos | sqrt | log
//! ```
//!
//! Only analytic operations are available. `sqrt`, `log` and non-integer
//! powers use the principal branch (cut along the negative reals).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Named parameter bindings.
pub type Params = BTreeMap<String, Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("zero raised to a power with non-positive real part")]
    ZeroPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }

    fn apply(self, z: Complex64) -> Result<Complex64, ExprError> {
        Ok(match self {
            Func::Exp => z.exp(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Sqrt => z.sqrt(),
            Func::Log => {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(ExprError::LogOfZero);
                }
                z.ln()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `source`. Identifiers other than `x`, `i`, `pi` and the
    /// function names must appear in `declared`.
    pub fn parse(source: &str, declared: &BTreeSet<String>) -> Result<Expr, ExprError> {
        let mut parser = Parser {
            src: source.as_bytes(),
            pos: 0,
            declared,
        };
        let e = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Parses an expression that may only reference `x`.
    pub fn parse_closed(source: &str) -> Result<Expr, ExprError> {
        Self::parse(source, &BTreeSet::new())
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(Complex64::new(v, 0.0))
    }

    pub fn eval(&self, x: Complex64, params: &Params) -> Result<Complex64, ExprError> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| ExprError::UnboundParameter(name.clone()))?,
            Expr::Neg(a) => -a.eval(x, params)?,
            Expr::Add(a, b) => a.eval(x, params)? + b.eval(x, params)?,
            Expr::Sub(a, b) => a.eval(x, params)? - b.eval(x, params)?,
            Expr::Mul(a, b) => a.eval(x, params)? * b.eval(x, params)?,
            Expr::Div(a, b) => {
                let den = b.eval(x, params)?;
                if den == Complex64::new(0.0, 0.0) {
                    return Err(ExprError::DivisionByZero);
                }
                a.eval(x, params)? / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, params)?;
                let e = b.eval(x, params)?;
                if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
                    let n = e.re as i32;
                    if n < 0 && base == Complex64::new(0.0, 0.0) {
                        return Err(ExprError::DivisionByZero);
                    }
                    base.powi(n)
                } else {
                    complex_pow(base, e)?
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x, params)?)?,
        })
    }

    /// Evaluates an expression with no parameters.
    pub fn eval_at(&self, x: Complex64) -> Result<Complex64, ExprError> {
        self.eval(x, &Params::new())
    }

    /// Replaces every parameter by its bound value.
    pub fn bind(&self, params: &Params) -> Result<Expr, ExprError> {
        Ok(match self {
            Expr::Param(name) => Expr::Num(
                *params
                    .get(name)
                    .ok_or_else(|| ExprError::UnboundParameter(name.clone()))?,
            ),
            Expr::Num(_) | Expr::Var => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(params)?)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Div(a, b) => Expr::Div(Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.bind(params)?), Box::new(b.bind(params)?)),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.bind(params)?)),
        })
    }

    /// Substitutes `replacement` for every occurrence of `x`.
    pub fn substitute_var(&self, replacement: &Expr) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute_var(replacement));
        match self {
            Expr::Var => replacement.clone(),
            Expr::Num(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, b) => Expr::Pow(sub(a), sub(b)),
            Expr::Call(f, a) => Expr::Call(*f, sub(a)),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Num(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    /// Symbolic derivative with respect to `x`. Applies only trivial
    /// folding of zeros and ones; no general simplification.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Param(_) => zero(),
            Expr::Var => one(),
            Expr::Neg(a) => neg(a.differentiate()),
            Expr::Add(a, b) => add(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => sub(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(), (**b).clone()),
                mul((**a).clone(), b.differentiate()),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.differentiate(), (**b).clone()),
                    mul((**a).clone(), b.differentiate()),
                ),
                pow((**b).clone(), Expr::num(2.0)),
            ),
            Expr::Pow(a, b) if !b.depends_on_x() => {
                let exponent_minus_one = match b.as_ref() {
                    Expr::Num(c) => Expr::Num(c - 1.0),
                    other => sub(other.clone(), one()),
                };
                mul(
                    mul((**b).clone(), pow((**a).clone(), exponent_minus_one)),
                    a.differentiate(),
                )
            }
            Expr::Pow(a, b) => {
                // d(u^v) = u^v (v' log u + v u'/u)
                let u = (**a).clone();
                let v = (**b).clone();
                mul(
                    self.clone(),
                    add(
                        mul(b.differentiate(), Expr::Call(Func::Log, Box::new(u.clone()))),
                        div(mul(v, a.differentiate()), u),
                    ),
                )
            }
            Expr::Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => Expr::Call(Func::Cos, Box::new(inner)),
                    Func::Cos => neg(Expr::Call(Func::Sin, Box::new(inner))),
                    Func::Sqrt => div(one(), mul(Expr::num(2.0), self.clone())),
                    Func::Log => div(one(), inner),
                };
                mul(outer, a.differentiate())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if c.im != 0.0 || c.re.is_sign_negative() => 5,
            _ => 6,
        }
    }
}

fn zero() -> Expr {
    Expr::num(0.0)
}

fn one() -> Expr {
    Expr::num(1.0)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(c) if c.im == 0.0 && c.re == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => Expr::Num(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else {
        Expr::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(b)
    } else {
        Expr::Sub(Box::new(a), Box::new(b))
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        zero()
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else if is_num(&a, -1.0) {
        neg(b)
    } else if is_num(&b, -1.0) {
        neg(a)
    } else if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        Expr::Num(x * y)
    } else if let (Expr::Neg(inner), Expr::Num(_)) = (&a, &b) {
        // keep literals in front: (-u)*c -> -(c*u)
        neg(mul(b, (**inner).clone()))
    } else if matches!(b, Expr::Num(_)) {
        mul(b, a)
    } else {
        Expr::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        zero()
    } else if is_num(&b, 1.0) {
        a
    } else {
        Expr::Div(Box::new(a), Box::new(b))
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else if is_num(&b, 0.0) {
        one()
    } else {
        Expr::Pow(Box::new(a), Box::new(b))
    }
}

fn complex_pow(base: Complex64, exponent: Complex64) -> Result<Complex64, ExprError> {
    if base == Complex64::new(0.0, 0.0) {
        return if exponent.re > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(ExprError::ZeroPower)
        };
    }
    Ok((exponent * base.ln()).exp())
}

fn fmt_real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_num(c: Complex64) -> String {
    if c == Complex64::new(0.0, 1.0) {
        "i".to_string()
    } else if c.im == 0.0 {
        if c.re.is_sign_negative() {
            format!("(-{})", fmt_real(-c.re))
        } else {
            fmt_real(c.re)
        }
    } else {
        let re = if c.re.is_sign_negative() {
            format!("-{}", fmt_real(-c.re))
        } else {
            fmt_real(c.re)
        };
        let (sign, im) = if c.im.is_sign_negative() {
            ("-", -c.im)
        } else {
            ("+", c.im)
        };
        format!("({re}{sign}{}*i)", fmt_real(im))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `wrap(child, min)` parenthesizes a child whose precedence is below `min`.
        fn wrap(child: &Expr, min: u8) -> String {
            if child.precedence() < min {
                format!("({child})")
            } else {
                child.to_string()
            }
        }
        match self {
            Expr::Num(c) => write!(f, "{}", fmt_num(*c)),
            Expr::Var => write!(f, "x"),
            Expr::Param(name) => write!(f, "{name}"),
            Expr::Neg(a) => write!(f, "-{}", wrap(a, 3)),
            Expr::Add(a, b) => write!(f, "{}+{}", wrap(a, 1), wrap(b, 2)),
            Expr::Sub(a, b) => write!(f, "{}-{}", wrap(a, 1), wrap(b, 2)),
            Expr::Mul(a, b) => write!(f, "{}*{}", wrap(a, 2), wrap(b, 3)),
            Expr::Div(a, b) => write!(f, "{}/{}", wrap(a, 2), wrap(b, 3)),
            Expr::Pow(a, b) => write!(f, "{}^{}", wrap(a, 5), wrap(b, 3)),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    declared: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
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

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == b'*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok(Expr::num(v))
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(func) = Func::from_name(name) {
            if self.peek() != Some(b'(') {
                return Err(self.error("expected `(` after function name"));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected `)`"));
            }
            self.pos += 1;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        match name {
            "x" => Ok(Expr::Var),
            "i" => Ok(Expr::Num(Complex64::new(0.0, 1.0))),
            "pi" => Ok(Expr::num(std::f64::consts::PI)),
            _ if self.declared.contains(name) => Ok(Expr::Param(name.to_string())),
            _ => Err(ExprError::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            }),
        }
    }
}
