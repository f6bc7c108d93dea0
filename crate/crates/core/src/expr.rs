//! Scalar expressions in `t` and `x`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 't' | 'x' | 'pi' | 'e' | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)` and `2^-1` is `0.5`. There is no implicit multiplication.
//! Functions: `exp ln sin cos sqrt abs` (one argument) and `pow` (two).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation error at byte {offset}: {message}")]
pub struct EvalError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("abs at byte {offset} is not differentiable")]
pub struct NonDifferentiable {
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    X,
}

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
    Ln,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Self::Exp,
            "ln" => Self::Ln,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            "pow" => Self::Pow,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Sqrt => "sqrt",
            Self::Abs => "abs",
            Self::Pow => "pow",
        }
    }

    fn arity(self) -> usize {
        if self == Self::Pow {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Expression tree. `pos` is the byte offset of the node in the source text
/// (0 for nodes synthesised by differentiation).
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub pos: usize,
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), i: 0 };
    p.skip_ws();
    if p.i == p.src.len() {
        return Err(p.err("an expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.i != p.src.len() {
        return Err(p.err("an operator or end of input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, expected: &str) -> ParseError {
        ParseError { offset: self.i, expected: expected.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.i < self.src.len() && self.src[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            let pos = self.i;
            self.i += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr { node: Node::Bin(op, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let pos = self.i;
            self.i += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr { node: Node::Bin(op, Box::new(lhs), Box::new(rhs)), pos };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            let pos = self.i;
            self.i += 1;
            let inner = self.unary()?;
            return Ok(Expr { node: Node::Neg(Box::new(inner)), pos });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            let pos = self.i;
            self.i += 1;
            let exp = self.unary()?;
            return Ok(Expr { node: Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), pos });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = match self.peek() {
            Some(_) => self.i,
            None => return Err(self.err("a number, variable, function or '('")),
        };
        let c = self.src[pos];
        if c == b'(' {
            self.i += 1;
            let e = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("')'"));
            }
            self.i += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            while self.i < self.src.len() && (self.src[self.i].is_ascii_alphanumeric() || self.src[self.i] == b'_') {
                self.i += 1;
            }
            let name = std::str::from_utf8(&self.src[pos..self.i]).expect("ascii");
            let node = match name {
                "t" => Node::Var(Var::T),
                "x" => Node::Var(Var::X),
                "pi" => Node::Num(std::f64::consts::PI),
                "e" => Node::Num(std::f64::consts::E),
                _ => {
                    let Some(f) = Func::from_name(name) else {
                        self.i = pos;
                        return Err(self.err("a variable (t, x), constant (pi, e) or function name"));
                    };
                    if self.peek() != Some(b'(') {
                        return Err(self.err("'(' after function name"));
                    }
                    self.i += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(b',') {
                        self.i += 1;
                        args.push(self.expr()?);
                    }
                    if self.peek() != Some(b')') {
                        return Err(self.err("',' or ')'"));
                    }
                    if args.len() != f.arity() {
                        return Err(ParseError { offset: pos, expected: format!("{} argument(s) for {}", f.arity(), f.name()) });
                    }
                    self.i += 1;
                    Node::Call(f, args)
                }
            };
            return Ok(Expr { node, pos });
        }
        Err(self.err("a number, variable, function or '('"))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.i;
        let s = self.src;
        let digits = |i: &mut usize| {
            let b = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - b
        };
        let mut n = digits(&mut self.i);
        if self.i < s.len() && s[self.i] == b'.' {
            self.i += 1;
            n += digits(&mut self.i);
        }
        if n == 0 {
            self.i = start;
            return Err(self.err("a digit"));
        }
        if self.i < s.len() && (s[self.i] == b'e' || s[self.i] == b'E') {
            let mut j = self.i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                self.i = j;
                digits(&mut self.i);
            }
        }
        let text = std::str::from_utf8(&s[start..self.i]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| ParseError { offset: start, expected: "a valid number".into() })?;
        Ok(Expr { node: Node::Num(v), pos: start })
    }
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr { node: Node::Num(v), pos: 0 }
    }

    pub fn var(v: Var) -> Self {
        Expr { node: Node::Var(v), pos: 0 }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        let fail = |msg: &str| EvalError { offset: self.pos, message: msg.to_string() };
        let v = match &self.node {
            Node::Num(v) => *v,
            Node::Var(Var::T) => t,
            Node::Var(Var::X) => x,
            Node::Neg(e) => -e.eval(t, x)?,
            Node::Bin(op, l, r) => {
                let a = l.eval(t, x)?;
                let b = r.eval(t, x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(fail("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b).map_err(&fail)?,
                }
            }
            Node::Call(f, args) => {
                let a = args[0].eval(t, x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(fail("ln of a nonpositive number"));
                        }
                        a.ln()
                    }
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(fail("sqrt of a negative number"));
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Pow => pow(a, args[1].eval(t, x)?).map_err(&fail)?,
                }
            }
        };
        if !v.is_finite() {
            return Err(fail("non-finite result"));
        }
        Ok(v)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match &self.node {
            Node::Num(_) => false,
            Node::Var(w) => *w == v,
            Node::Neg(e) => e.depends_on(v),
            Node::Bin(_, l, r) => l.depends_on(v) || r.depends_on(v),
            Node::Call(_, args) => args.iter().any(|a| a.depends_on(v)),
        }
    }

    fn as_num(&self) -> Option<f64> {
        match self.node {
            Node::Num(v) => Some(v),
            _ => None,
        }
    }
}

fn pow(a: f64, b: f64) -> Result<f64, &'static str> {
    if a == 0.0 && b < 0.0 {
        return Err("zero raised to a negative power");
    }
    if a < 0.0 && b != b.trunc() {
        return Err("negative base with non-integer exponent");
    }
    Ok(a.powf(b))
}

fn boxed(node: Node) -> Expr {
    Expr { node, pos: 0 }
}

fn finite_or(v: f64, fallback: Expr) -> Expr {
    if v.is_finite() {
        Expr::num(v)
    } else {
        fallback
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        (Some(p), Some(q)) => Expr::num(p + q),
        _ => boxed(Node::Bin(BinOp::Add, Box::new(a), Box::new(b))),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        (Some(p), Some(q)) => Expr::num(p - q),
        _ => boxed(Node::Bin(BinOp::Sub, Box::new(a), Box::new(b))),
    }
}

fn neg(a: Expr) -> Expr {
    match a.node {
        Node::Num(v) => Expr::num(-v),
        Node::Neg(inner) => *inner,
        node => boxed(Node::Neg(Box::new(Expr { node, pos: a.pos }))),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(0.0), _) | (_, Some(0.0)) => Expr::num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        (Some(p), Some(q)) => Expr::num(p * q),
        (None, Some(_)) => boxed(Node::Bin(BinOp::Mul, Box::new(b), Box::new(a))),
        _ => boxed(Node::Bin(BinOp::Mul, Box::new(a), Box::new(b))),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.as_num(), b.as_num()) {
        (Some(0.0), _) => Expr::num(0.0),
        (_, Some(1.0)) => a,
        (Some(p), Some(q)) if q != 0.0 => finite_or(p / q, boxed(Node::Bin(BinOp::Div, Box::new(a.clone()), Box::new(b.clone())))),
        _ => boxed(Node::Bin(BinOp::Div, Box::new(a), Box::new(b))),
    }
}

fn powe(a: Expr, b: Expr) -> Expr {
    match b.as_num() {
        Some(0.0) => Expr::num(1.0),
        Some(1.0) => a,
        _ => boxed(Node::Bin(BinOp::Pow, Box::new(a), Box::new(b))),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    boxed(Node::Call(f, vec![a]))
}

/// Symbolic derivative with light simplification.
pub fn differentiate(e: &Expr, v: Var) -> Result<Expr, NonDifferentiable> {
    if !e.depends_on(v) {
        return Ok(Expr::num(0.0));
    }
    Ok(match &e.node {
        Node::Num(_) => Expr::num(0.0),
        Node::Var(w) => Expr::num(if *w == v { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(differentiate(a, v)?),
        Node::Bin(op, l, r) => {
            let (l, r) = (l.as_ref().clone(), r.as_ref().clone());
            match op {
                BinOp::Add => add(differentiate(&l, v)?, differentiate(&r, v)?),
                BinOp::Sub => sub(differentiate(&l, v)?, differentiate(&r, v)?),
                BinOp::Mul => {
                    let dl = differentiate(&l, v)?;
                    let dr = differentiate(&r, v)?;
                    add(mul(dl, r), mul(l, dr))
                }
                BinOp::Div => {
                    let dl = differentiate(&l, v)?;
                    let dr = differentiate(&r, v)?;
                    let num = sub(mul(dl, r.clone()), mul(l, dr));
                    div(num, powe(r, Expr::num(2.0)))
                }
                BinOp::Pow => d_pow(l, r, v)?,
            }
        }
        Node::Call(f, args) => {
            if *f == Func::Pow {
                return d_pow(args[0].clone(), args[1].clone(), v);
            }
            let a = args[0].clone();
            let da = differentiate(&a, v)?;
            let outer = match f {
                Func::Exp => call(Func::Exp, a),
                Func::Ln => return Ok(div(da, a)),
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Sqrt => return Ok(div(da, mul(Expr::num(2.0), call(Func::Sqrt, a)))),
                Func::Abs => return Err(NonDifferentiable { offset: e.pos }),
                Func::Pow => unreachable!(),
            };
            mul(outer, da)
        }
    })
}

fn d_pow(u: Expr, w: Expr, v: Var) -> Result<Expr, NonDifferentiable> {
    let du = differentiate(&u, v)?;
    if !w.depends_on(v) {
        let wm1 = sub(w.clone(), Expr::num(1.0));
        return Ok(mul(mul(w, powe(u, wm1)), du));
    }
    let dw = differentiate(&w, v)?;
    let whole = powe(u.clone(), w.clone());
    if !u.depends_on(v) {
        return Ok(mul(whole, mul(call(Func::Ln, u), dw)));
    }
    let inner = add(mul(dw, call(Func::Ln, u.clone())), div(mul(w, du), u));
    Ok(mul(whole, inner))
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match &e.node {
        Node::Num(v) if *v < 0.0 || v.is_sign_negative() => PREC_NEG,
        Node::Num(_) | Node::Var(_) | Node::Call(..) => PREC_ATOM,
        Node::Neg(_) => PREC_NEG,
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Node::Bin(BinOp::Pow, ..) => PREC_POW,
    }
}

fn write_sub(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical text that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Node::Var(Var::T) => f.write_str("t"),
            Node::Var(Var::X) => f.write_str("x"),
            Node::Neg(a) => {
                f.write_str("-")?;
                write_sub(f, a, prec(a) < PREC_NEG)
            }
            Node::Bin(op, l, r) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", PREC_ADD),
                    BinOp::Sub => ("-", PREC_ADD),
                    BinOp::Mul => ("*", PREC_MUL),
                    BinOp::Div => ("/", PREC_MUL),
                    BinOp::Pow => ("^", PREC_POW),
                };
                if *op == BinOp::Pow {
                    // the base must be an atom; the exponent may be a power or a negation
                    write_sub(f, l, prec(l) < PREC_ATOM)?;
                    f.write_str("^")?;
                    write_sub(f, r, prec(r) < PREC_NEG)
                } else {
                    write_sub(f, l, prec(l) < p)?;
                    f.write_str(sym)?;
                    write_sub(f, r, prec(r) <= p)
                }
            }
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(s: &str, t: f64, x: f64) -> f64 {
        parse(s).unwrap().eval(t, x).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(ev("2+3*t", 4.0, 0.0), 14.0);
        assert!((ev("exp(-t)*x^2", 1.0, 2.0) - 1.471517765).abs() < 1e-9);
        assert_eq!(parse("2+*3").unwrap_err().offset, 2);
        assert_eq!(ev("pi", 0.0, 0.0), std::f64::consts::PI);
        assert_eq!(ev("-t^2", 3.0, 0.0), -9.0);
        assert!(parse("1/ (t-1)").unwrap().eval(1.0, 0.0).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1-2-3", 0.0, 0.0), -4.0);
        assert_eq!(ev("--t", 2.0, 0.0), 2.0);
        assert_eq!(ev("pow(x, 3) + 1.5e1", 0.0, 2.0), 23.0);
        assert_eq!(ev("e", 0.0, 0.0), std::f64::consts::E);
    }

    #[test]
    fn parse_errors() {
        assert!(parse("2t").is_err());
        assert!(parse("").is_err());
        assert!(parse("   ").is_err());
        assert_eq!(parse("foo(1)").unwrap_err().offset, 0);
        assert!(parse("pow(1)").is_err());
        assert!(parse("sin(1,2)").is_err());
        assert_eq!(parse("(1+2").unwrap_err().offset, 4);
        assert!(parse("y").is_err());
        assert!(parse("1 2").is_err());
    }

    #[test]
    fn eval_errors() {
        assert!(parse("ln(t)").unwrap().eval(0.0, 0.0).is_err());
        assert!(parse("sqrt(t)").unwrap().eval(-1.0, 0.0).is_err());
        assert!(parse("t^0.5").unwrap().eval(-1.0, 0.0).is_err());
        assert!(parse("exp(x)").unwrap().eval(0.0, 1000.0).is_err());
        let e = parse("1 + ln(t - 1)").unwrap().eval(1.0, 0.0).unwrap_err();
        assert_eq!(e.offset, 4);
    }

    #[test]
    fn derivative_examples() {
        let d = |s: &str, v| differentiate(&parse(s).unwrap(), v).unwrap().to_string();
        assert_eq!(d("t^2", Var::T), "2*t");
        assert_eq!(d("exp(-t)", Var::T), "-exp(-t)");
        assert_eq!(d("x", Var::T), "0");
        assert_eq!(d("abs(x)", Var::T), "0");
        assert!(differentiate(&parse("abs(t)").unwrap(), Var::T).is_err());
    }

    #[test]
    fn render_round_trip_simple() {
        for s in ["-t^2", "(-t)^2", "2^-t", "1-(2-t)", "t/(x*2)", "-(t+1)*x", "pow(t,x)^2", "(t^2)^3", "-2^t"] {
            let a = parse(s).unwrap();
            let b = parse(&a.to_string()).unwrap();
            for (t, x) in [(0.3, 1.7), (1.2, 0.4), (2.0, 2.5)] {
                assert_eq!(a.eval(t, x).unwrap(), b.eval(t, x).unwrap(), "{s} -> {a}");
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![Just("t".to_string()), Just("x".to_string()), (1u32..9).prop_map(|n| format!("{}", n as f64 / 4.0)),];
        leaf.prop_recursive(5, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}+{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}-{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}*{b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2+({b})^2)")),
                inner.clone().prop_map(|a| format!("-{a}")),
                inner.clone().prop_map(|a| format!("sin({a})")),
                inner.clone().prop_map(|a| format!("cos({a})")),
                inner.clone().prop_map(|a| format!("exp(({a})/4)")),
                inner.clone().prop_map(|a| format!("ln(1+({a})^2)")),
                inner.clone().prop_map(|a| format!("sqrt(1+({a})^2)")),
                inner.clone().prop_map(|a| format!("({a})^2")),
                inner.prop_map(|a| format!("(1+({a})^2)^0.5")),
            ]
        })
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_differences(src in arb_expr()) {
            let e = parse(&src).unwrap();
            let de = differentiate(&e, Var::T).unwrap();
            for i in 0..20 {
                let t = 0.1 + 0.09 * i as f64;
                let x = 0.7 - 0.05 * i as f64;
                let h = 1e-5;
                let (Ok(p), Ok(m), Ok(d)) = (e.eval(t + h, x), e.eval(t - h, x), de.eval(t, x)) else { continue };
                let fd = (p - m) / (2.0 * h);
                prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{} at t={}: {} vs {}", src, t, d, fd);
            }
        }

        #[test]
        fn render_reparses_identically(src in arb_expr()) {
            let e = parse(&src).unwrap();
            let r = parse(&e.to_string()).unwrap();
            for i in 0..20 {
                let (t, x) = (0.1 * i as f64, 1.0 - 0.07 * i as f64);
                prop_assert_eq!(e.eval(t, x).ok(), r.eval(t, x).ok());
            }
        }

        #[test]
        fn derivative_renders_and_reparses(src in arb_expr()) {
            let de = differentiate(&parse(&src).unwrap(), Var::X).unwrap();
            let r = parse(&de.to_string()).unwrap();
            for i in 0..10 {
                let (t, x) = (0.2 * i as f64, 0.5 + 0.1 * i as f64);
                if let (Ok(a), Ok(b)) = (de.eval(t, x), r.eval(t, x)) {
                    prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
                }
            }
        }
    }
}
