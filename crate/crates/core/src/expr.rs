//! Arithmetic expression language for metric, potential and vector-field entries.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? number | '(' exponent ')'
//! atom    := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2` is `-(x^2)`), is right-associative
//! and only accepts a numeric literal exponent. A minus directly in front of a
//! number literal is folded into the literal.

use std::fmt;

use thiserror::Error;

use crate::jets::{Jet, JetError, JetFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("non-literal exponent at byte {offset}")]
    NonLiteralExponent { offset: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn jet_fn(self) -> JetFn {
        match self {
            Func::Exp => JetFn::Exp,
            Func::Log => JetFn::Log,
            Func::Sin => JetFn::Sin,
            Func::Cos => JetFn::Cos,
            Func::Sinh => JetFn::Sinh,
            Func::Cosh => JetFn::Cosh,
            Func::Sqrt => JetFn::Sqrt,
        }
    }

    fn eval(self, x: f64) -> Result<f64, ExprError> {
        Ok(match self {
            Func::Exp => x.exp(),
            Func::Log if x <= 0.0 => return Err(ExprError::Domain(format!("log of {x}"))),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Sqrt if x <= 0.0 => return Err(ExprError::Domain(format!("sqrt of {x}"))),
            Func::Sqrt => x.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Parsed expression tree. Coordinates are stored by their slot index.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

/// Parse `text` over the named chart coordinates.
pub fn parse_expr(text: &str, coords: &[String]) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, coords };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: &'a [String],
}

impl Parser<'_> {
    fn syntax(&self, msg: impl Into<String>) -> ExprError {
        ExprError::Syntax { offset: self.pos, msg: msg.into() }
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

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let bare = matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.');
            let inner = self.unary()?;
            // a negated bare literal is itself a literal
            return Ok(match inner {
                Expr::Num(v) if bare => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let e = self.exponent().map_err(|err| match err {
                ExprError::Syntax { .. } | ExprError::UnknownIdentifier { .. } => {
                    ExprError::NonLiteralExponent { offset: at }
                }
                other => other,
            })?;
            // right-associative: a^b^c = a^(b^c), and b^c is itself a literal
            let mut chain = vec![e];
            while self.peek() == Some(b'^') {
                self.pos += 1;
                let at = self.pos;
                chain.push(self.exponent().map_err(|_| ExprError::NonLiteralExponent { offset: at })?);
            }
            let e = chain.into_iter().rev().reduce(|acc, b| b.powf(acc)).expect("non-empty chain");
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.exponent()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.exponent()?;
                self.expect(b')')?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let name = self.ident();
                if name == "pi" {
                    Ok(std::f64::consts::PI)
                } else {
                    Err(ExprError::NonLiteralExponent { offset: start })
                }
            }
            _ => Err(self.syntax("expected exponent")),
        }
    }

    fn number(&mut self) -> Result<f64, ExprError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        self.pos = i;
        text.parse::<f64>().map_err(|_| ExprError::Syntax { offset: start, msg: format!("bad number `{text}`") })
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.ident();
                if let Some(f) = Func::from_name(&name) {
                    if self.peek() == Some(b'(') {
                        self.pos += 1;
                        let arg = self.sum()?;
                        self.expect(b')')?;
                        return Ok(Expr::Call(f, Box::new(arg)));
                    }
                    return Err(self.syntax(format!("`{name}` must be called")));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ExprError::UnknownIdentifier { name, offset: start }),
                }
            }
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn call(f: Func, e: Expr) -> Expr {
        Expr::Call(f, Box::new(e))
    }

    pub fn pow(self, r: f64) -> Expr {
        Expr::Pow(Box::new(self), r)
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(self), Box::new(o))
    }

    pub fn div(self, o: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(self), Box::new(o))
    }

    /// Largest coordinate slot referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.max_var(),
            Expr::Bin(_, a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => point[*i],
            Expr::Neg(e) => -e.eval_f64(point)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_f64(point)?, b.eval_f64(point)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y == 0.0 => return Err(ExprError::Domain("division by zero".into())),
                    BinOp::Div => x / y,
                }
            }
            Expr::Pow(e, r) => {
                let x = e.eval_f64(point)?;
                if r.fract() != 0.0 && x <= 0.0 {
                    return Err(ExprError::Domain(format!("non-integer power of {x}")));
                }
                if r.fract() == 0.0 && *r < 0.0 && x == 0.0 {
                    return Err(ExprError::Domain("negative power of zero".into()));
                }
                if r.fract() == 0.0 && r.abs() < 64.0 {
                    x.powi(*r as i32)
                } else {
                    x.powf(*r)
                }
            }
            Expr::Call(f, e) => f.eval(e.eval_f64(point)?)?,
        })
    }

    /// Jet of the expression at `point`, truncated at `order`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, ExprError> {
        let dim = point.len();
        Ok(match self {
            Expr::Num(v) => Jet::constant(*v, dim, order)?,
            Expr::Var(i) => Jet::variable(point[*i], *i, dim, order)?,
            Expr::Neg(e) => -&e.eval_jet(point, order)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval_jet(point, order)?, b.eval_jet(point, order)?);
                match op {
                    BinOp::Add => &x + &y,
                    BinOp::Sub => &x - &y,
                    BinOp::Mul => &x * &y,
                    BinOp::Div => x.div(&y)?,
                }
            }
            Expr::Pow(e, r) => e.eval_jet(point, order)?.powf(*r)?,
            Expr::Call(f, e) => e.eval_jet(point, order)?.apply(f.jet_fn())?,
        })
    }

    /// Fully parenthesised rendering using the given coordinate names; reparses
    /// to an identical tree.
    pub fn render(&self, coords: &[String]) -> String {
        let mut s = String::new();
        self.write(&mut s, coords);
        s
    }

    fn write(&self, out: &mut String, coords: &[String]) {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    out.push_str(&format!("(-{})", fmt_num(-v)));
                } else {
                    out.push_str(&fmt_num(*v));
                }
            }
            Expr::Var(i) => out.push_str(&coords[*i]),
            Expr::Neg(e) if matches!(**e, Expr::Num(_)) => {
                out.push_str("(-(");
                e.write(out, coords);
                out.push_str("))");
            }
            Expr::Neg(e) => {
                out.push_str("(-");
                e.write(out, coords);
                out.push(')');
            }
            Expr::Bin(op, a, b) => {
                out.push('(');
                a.write(out, coords);
                out.push(' ');
                out.push(op.symbol());
                out.push(' ');
                b.write(out, coords);
                out.push(')');
            }
            Expr::Pow(e, r) => {
                out.push('(');
                e.write(out, coords);
                if *r < 0.0 {
                    out.push_str(&format!(")^(-{})", fmt_num(-r)));
                } else {
                    out.push_str(&format!(")^{}", fmt_num(*r)));
                }
            }
            Expr::Call(f, e) => {
                out.push_str(f.name());
                out.push('(');
                e.write(out, coords);
                out.push(')');
            }
        }
    }
}

fn fmt_num(v: f64) -> String {
    // `{:?}` is the shortest representation that round-trips exactly
    let s = format!("{v:?}");
    if s.contains("inf") || s.contains("NaN") {
        panic!("non-finite literal in expression");
    }
    s
}

/// Displays with generic coordinate names `x1, x2, ...`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.max_var().map_or(0, |m| m + 1);
        let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        f.write_str(&self.render(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn sum_of_squares() {
        let e = parse_expr("x1^2 + x2^2", &coords(2)).unwrap();
        assert_eq!(
            e,
            Expr::Bin(BinOp::Add, Box::new(Expr::Var(0).pow(2.0)), Box::new(Expr::Var(1).pow(2.0)))
        );
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expr("exp(2*u)", &coords(1)).unwrap_err();
        assert_eq!(err, ExprError::UnknownIdentifier { name: "u".into(), offset: 6 });
    }

    #[test]
    fn literal_arithmetic_at_origin() {
        let e = parse_expr("4/(1+x1^2+x2^2+x3^2)^2", &coords(3)).unwrap();
        assert_eq!(e.eval_f64(&[0.0, 0.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn precedence_and_associativity() {
        let c = coords(1);
        assert_eq!(parse_expr("-x1^2", &c).unwrap().eval_f64(&[3.0]).unwrap(), -9.0);
        assert_eq!(parse_expr("2^3^2", &c).unwrap().eval_f64(&[0.0]).unwrap(), 512.0);
        assert_eq!(parse_expr("8/2/2", &c).unwrap().eval_f64(&[0.0]).unwrap(), 2.0);
        assert_eq!(parse_expr("1 - 2 - 3", &c).unwrap().eval_f64(&[0.0]).unwrap(), -4.0);
        assert_eq!(parse_expr("x1^-2", &c).unwrap().eval_f64(&[2.0]).unwrap(), 0.25);
        assert!((parse_expr("pi", &c).unwrap().eval_f64(&[0.0]).unwrap() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let c = coords(2);
        assert!(matches!(parse_expr("x1 + ", &c), Err(ExprError::Syntax { offset: 5, .. })));
        assert!(matches!(parse_expr("(x1", &c), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("x1^x2", &c), Err(ExprError::NonLiteralExponent { offset: 3 })));
        assert!(matches!(parse_expr("sin x1", &c), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn product_jet() {
        let e = parse_expr("x1*x2", &coords(2)).unwrap();
        let j = e.eval_jet(&[2.0, 3.0], 2).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.coeff(&[1, 0]), 3.0);
        assert_eq!(j.coeff(&[0, 1]), 2.0);
        assert_eq!(j.coeff(&[1, 1]), 1.0);
    }

    #[test]
    fn sqrt_domain() {
        let e = parse_expr("sqrt(x1)", &coords(1)).unwrap();
        assert!(e.eval_jet(&[-1.0], 2).is_err());
        assert!(e.eval_f64(&[-1.0]).is_err());
    }

    #[test]
    fn render_reparses() {
        let c = coords(2);
        for src in ["-x1^2 + 3.5e-3*sin(x2)/(1+x1)", "exp(-(x1 - 2)^(-1.5))", "x1 - -2"] {
            let e = parse_expr(src, &c).unwrap();
            assert_eq!(parse_expr(&e.render(&c), &c).unwrap(), e, "{src}");
        }
    }
}
