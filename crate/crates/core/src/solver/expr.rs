//! Map specifications: small arithmetic expressions in `x1 .. xd`.
//!
//! Grammar (precedence low to high): `+ -`, `* /`, unary `-`, `^` (right
//! associative), then numbers, variables, parentheses and the functions
//! `sin cos exp abs min max`. Numeric literals are parsed as exact
//! rationals so polynomial maps evaluate exactly over `Q`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const { exact: Rational, approx: f64 },
    /// Zero-based variable index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn constant(r: Rational) -> Self {
        let approx = ToPrimitive::to_f64(&r).unwrap_or(f64::NAN);
        Expr::Const { exact: r, approx }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Largest variable index used plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const { .. } => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<S> {
        let v = match self {
            Expr::Const { exact, approx } => S::from_constant(exact, *approx),
            Expr::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Evaluation(format!("variable x{} on a point of dimension {}", i + 1, x.len())))?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let den = b.eval(x)?;
                if den.is_zero() {
                    return Err(Error::Evaluation("division by zero".into()));
                }
                a.eval(x)? / den
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x)?;
                let exp = b.eval(x)?;
                base.pow(&exp)
                    .ok_or_else(|| Error::Evaluation("power is not representable in this scalar kind".into()))?
            }
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.eval(x)).collect::<Result<Vec<S>>>()?;
                let unary = |g: fn(&S) -> Option<S>, name: &str| {
                    g(&vals[0]).ok_or_else(|| Error::Evaluation(format!("{name} has no exact value")))
                };
                match f {
                    Func::Sin => unary(S::sin, "sin")?,
                    Func::Cos => unary(S::cos, "cos")?,
                    Func::Exp => unary(S::exp, "exp")?,
                    Func::Abs => vals[0].abs_val(),
                    Func::Min => vals.into_iter().reduce(|a, b| if b < a { b } else { a }).expect("arity checked"),
                    Func::Max => vals.into_iter().reduce(|a, b| if b > a { b } else { a }).expect("arity checked"),
                }
            }
        };
        if !v.is_finite_value() {
            return Err(Error::Evaluation("non-finite value".into()));
        }
        Ok(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { exact, .. } => write!(f, "{exact}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, args) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Abs => "abs",
                    Func::Min => "min",
                    Func::Max => "max",
                };
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if let Some(idx) = word.strip_prefix('x').filter(|s| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())) {
                    let i: usize = idx.parse().map_err(|_| self.error("bad variable index"))?;
                    if i == 0 {
                        return Err(self.error("variables are numbered from x1"));
                    }
                    return Ok(Expr::Var(i - 1));
                }
                let func = match word {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "abs" => Func::Abs,
                    "min" => Func::Min,
                    "max" => Func::Max,
                    _ => {
                        self.pos = start;
                        return Err(self.error(&format!("unknown identifier '{word}'")));
                    }
                };
                if !self.eat(b'(') {
                    return Err(self.error("expected '(' after function name"));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                let ok = match func {
                    Func::Min | Func::Max => args.len() >= 2,
                    _ => args.len() == 1,
                };
                if !ok {
                    return Err(self.error("wrong number of arguments"));
                }
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.error("expected a number, variable, function or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            std::str::from_utf8(&p.src[s..p.pos]).expect("ascii").to_string()
        };
        let int_part = digits(self);
        let mut frac_part = String::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            frac_part = digits(self);
        }
        if int_part.is_empty() && frac_part.is_empty() {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        let mut exponent: i64 = 0;
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            self.pos += 1;
            let neg = if self.pos < self.src.len() && (self.src[self.pos] == b'-' || self.src[self.pos] == b'+') {
                self.pos += 1;
                self.src[self.pos - 1] == b'-'
            } else {
                false
            };
            let e = digits(self);
            exponent = e.parse().map_err(|_| self.error("malformed exponent"))?;
            if neg {
                exponent = -exponent;
            }
        }
        let mantissa: BigInt = format!("{int_part}{frac_part}")
            .parse()
            .map_err(|_| self.error("malformed number"))?;
        let scale = exponent - frac_part.len() as i64;
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Expr::constant(value))
    }
}

/// How a map is written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapDescriptor {
    Expr {
        expr: ExprSource,
        #[serde(default)]
        m: Option<usize>,
    },
    Builtin(Builtin),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprSource {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum Builtin {
    /// `x -> <u, x>`.
    Linear { u: Vec<f64> },
    /// `x -> x_index` (1-based).
    Coordinate { index: usize },
    Constant { value: f64 },
}

/// A map `R^d -> R^m` given by one expression per output component.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    components: Vec<Expr>,
}

impl MapSpec {
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Scenario("a map needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn parse(sources: &[&str]) -> Result<Self> {
        Self::new(sources.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?)
    }

    pub fn from_descriptor(desc: &MapDescriptor) -> Result<Self> {
        match desc {
            MapDescriptor::Expr { expr, m } => {
                let sources: Vec<&str> = match expr {
                    ExprSource::One(s) => vec![s.as_str()],
                    ExprSource::Many(v) => v.iter().map(String::as_str).collect(),
                };
                let spec = Self::parse(&sources)?;
                if let Some(m) = m {
                    if *m != spec.output_dim() {
                        return Err(Error::Scenario(format!(
                            "declared m = {m} but the map has {} components",
                            spec.output_dim()
                        )));
                    }
                }
                Ok(spec)
            }
            MapDescriptor::Builtin(b) => Self::new(vec![builtin_expr(b)?]),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    pub fn arity(&self) -> usize {
        self.components.iter().map(Expr::arity).max().unwrap_or(0)
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// Split off the first component: `f = f1 (+) h`.
    pub fn split_first(&self) -> (MapSpec, Option<MapSpec>) {
        let first = MapSpec {
            components: vec![self.components[0].clone()],
        };
        let rest = (self.components.len() > 1).then(|| MapSpec {
            components: self.components[1..].to_vec(),
        });
        (first, rest)
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.components.iter().map(|e| e.eval(x)).collect()
    }

    /// Float evaluation into a caller buffer.
    pub fn eval_into(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        for e in &self.components {
            out.push(e.eval(x)?);
        }
        Ok(())
    }
}

fn builtin_expr(b: &Builtin) -> Result<Expr> {
    let exact = |v: f64| {
        rational_from_f64(v).ok_or_else(|| Error::Scenario(format!("non-finite constant {v}")))
    };
    Ok(match b {
        Builtin::Linear { u } => {
            if u.is_empty() {
                return Err(Error::Scenario("linear map needs a nonempty u".into()));
            }
            let mut terms = u.iter().enumerate().map(|(i, &c)| -> Result<Expr> {
                Ok(Expr::Mul(Box::new(Expr::constant(exact(c)?)), Box::new(Expr::Var(i))))
            });
            let first = terms.next().expect("nonempty")?;
            terms.try_fold(first, |acc, t| Ok::<_, Error>(Expr::Add(Box::new(acc), Box::new(t?))))?
        }
        Builtin::Coordinate { index } => {
            if *index == 0 {
                return Err(Error::Scenario("coordinates are numbered from 1".into()));
            }
            Expr::Var(index - 1)
        }
        Builtin::Constant { value } => Expr::constant(exact(*value)?),
    })
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            components: vec![Expr::constant(Rational::one())],
        }
    }
}

impl From<Expr> for MapSpec {
    fn from(e: Expr) -> Self {
        Self { components: vec![e] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("x1 + x2^2").unwrap();
        assert_eq!(e.eval(&[1.0, 3.0]).unwrap(), 10.0);
        assert_eq!(e.eval(&[rat(1, 2), rat(1, 3)]).unwrap(), rat(11, 18));
        let e = Expr::parse("-2*x1^2^1 - (x2 - 0.5)/4 + max(x1, x2, 0)").unwrap();
        assert_eq!(e.eval(&[rat(1, 1), rat(5, 2)]).unwrap(), rat(-2, 1) - rat(1, 2) + rat(5, 2));
        assert_eq!(Expr::parse("1.25e-1").unwrap().eval::<Rational>(&[]).unwrap(), rat(1, 8));
    }

    #[test]
    fn exactness_limits() {
        let e = Expr::parse("sin(x1)").unwrap();
        assert!(e.eval(&[rat(0, 1)]).is_err());
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.0);
        assert!(Expr::parse("x1^0.5").unwrap().eval(&[rat(4, 1)]).is_err());
        assert!(Expr::parse("1/x1").unwrap().eval(&[0.0]).is_err());
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "x0", "x1 +", "foo(x1)", "sin(x1, x2)", "max(x1)", "(x1", "x1 x2"] {
            assert!(Expr::parse(bad).is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn descriptors() {
        let d: MapDescriptor = serde_json::from_str(r#"{"expr":"x1","m":1}"#).unwrap();
        assert_eq!(MapSpec::from_descriptor(&d).unwrap().output_dim(), 1);
        let d: MapDescriptor = serde_json::from_str(r#"{"expr":["x1","x2*x3"],"m":2}"#).unwrap();
        assert_eq!(MapSpec::from_descriptor(&d).unwrap().arity(), 3);
        let d: MapDescriptor = serde_json::from_str(r#"{"expr":["x1"],"m":2}"#).unwrap();
        assert!(MapSpec::from_descriptor(&d).is_err());
        let d: MapDescriptor = serde_json::from_str(r#"{"builtin":"linear","u":[0.5,-2]}"#).unwrap();
        let f = MapSpec::from_descriptor(&d).unwrap();
        assert_eq!(f.eval(&[2.0, 1.0]).unwrap(), vec![-1.0]);
    }
}
