//! Real-valued expressions: parsing, printing, evaluation, substitution and
//! symbolic differentiation.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum   := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' int)?          int := ['-'] digits | '(' ['-'] digits ')'
//! atom  := number | ident | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Functions are `sin`, `cos`, `exp` and `tanh`. Unary minus on a literal
//! folds into the literal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "tanh" => Some(Func::Tanh),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

use Expr::*;

pub fn num(v: f64) -> Expr {
    Num(v)
}

pub fn var(s: &str) -> Expr {
    Var(s.to_string())
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Add(Box::new(self), Box::new(o))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Sub(Box::new(self), Box::new(o))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Mul(Box::new(self), Box::new(o))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Div(Box::new(self), Box::new(o))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Neg(Box::new(self))
    }
}

impl Expr {
    pub fn pow(self, n: i32) -> Expr {
        Pow(Box::new(self), n)
    }

    pub fn call(f: Func, e: Expr) -> Expr {
        Call(f, Box::new(e))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Num(v) if *v == 1.0)
    }

    pub fn eval<F: Fn(&str) -> Option<f64>>(&self, env: &F) -> Result<f64> {
        let v = self.eval_raw(env)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(self.to_string()));
        }
        Ok(v)
    }

    fn eval_raw<F: Fn(&str) -> Option<f64>>(&self, env: &F) -> Result<f64> {
        Ok(match self {
            Num(v) => *v,
            Var(s) => env(s).ok_or_else(|| Error::UnboundVariable(s.clone()))?,
            Neg(a) => -a.eval_raw(env)?,
            Add(a, b) => a.eval_raw(env)? + b.eval_raw(env)?,
            Sub(a, b) => a.eval_raw(env)? - b.eval_raw(env)?,
            Mul(a, b) => a.eval_raw(env)? * b.eval_raw(env)?,
            Div(a, b) => a.eval_raw(env)? / b.eval_raw(env)?,
            Pow(a, n) => a.eval_raw(env)?.powi(*n),
            Call(f, a) => f.apply(a.eval_raw(env)?),
        })
    }

    /// Evaluate with variables bound by name from parallel slices.
    pub fn eval_with(&self, names: &[String], values: &[f64]) -> Result<f64> {
        self.eval(&|s: &str| names.iter().position(|n| n == s).map(|i| values[i]))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Num(_) => {}
            Var(s) => {
                out.insert(s.clone());
            }
            Neg(a) | Pow(a, _) | Call(_, a) => a.collect_vars(out),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace variables for which `f` returns an expression.
    pub fn subst<F: Fn(&str) -> Option<Expr>>(&self, f: &F) -> Expr {
        match self {
            Num(v) => Num(*v),
            Var(s) => f(s).unwrap_or_else(|| Var(s.clone())),
            Neg(a) => Neg(Box::new(a.subst(f))),
            Add(a, b) => Add(Box::new(a.subst(f)), Box::new(b.subst(f))),
            Sub(a, b) => Sub(Box::new(a.subst(f)), Box::new(b.subst(f))),
            Mul(a, b) => Mul(Box::new(a.subst(f)), Box::new(b.subst(f))),
            Div(a, b) => Div(Box::new(a.subst(f)), Box::new(b.subst(f))),
            Pow(a, n) => Pow(Box::new(a.subst(f)), *n),
            Call(g, a) => Call(*g, Box::new(a.subst(f))),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Expr {
        self.subst(&|s: &str| map.get(s).map(|n| Var(n.clone())))
    }

    /// Identity and zero folding plus constant folding. Never reassociates,
    /// so evaluation performs the same floating point operations.
    pub fn simplify(&self) -> Expr {
        match self {
            Num(v) => Num(*v),
            Var(s) => Var(s.clone()),
            Neg(a) => match a.simplify() {
                Num(v) => Num(-v),
                Neg(b) => *b,
                b => Neg(Box::new(b)),
            },
            Add(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x + y),
                (x, y) if x.is_zero() => y,
                (x, y) if y.is_zero() => x,
                (x, y) => Add(Box::new(x), Box::new(y)),
            },
            Sub(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x - y),
                (x, y) if y.is_zero() => x,
                (x, y) if x.is_zero() => Neg(Box::new(y)).simplify(),
                (x, y) => Sub(Box::new(x), Box::new(y)),
            },
            Mul(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) => Num(x * y),
                (x, y) if x.is_zero() || y.is_zero() => Num(0.0),
                (x, y) if x.is_one() => y,
                (x, y) if y.is_one() => x,
                (x, y) => Mul(Box::new(x), Box::new(y)),
            },
            Div(a, b) => match (a.simplify(), b.simplify()) {
                (Num(x), Num(y)) if y != 0.0 => Num(x / y),
                (x, y) if y.is_one() => x,
                (x, y) if x.is_zero() && !y.is_zero() => Num(0.0),
                (x, y) => Div(Box::new(x), Box::new(y)),
            },
            Pow(a, n) => match (a.simplify(), *n) {
                (_, 0) => Num(1.0),
                (x, 1) => x,
                (Num(x), n) if x != 0.0 || n > 0 => Num(x.powi(n)),
                (x, n) => Pow(Box::new(x), n),
            },
            Call(f, a) => match a.simplify() {
                Num(x) => Num(f.apply(x)),
                x => Call(*f, Box::new(x)),
            },
        }
    }

    /// Symbolic derivative with respect to `v`, simplified.
    pub fn diff(&self, v: &str) -> Expr {
        self.diff_raw(v).simplify()
    }

    fn diff_raw(&self, v: &str) -> Expr {
        match self {
            Num(_) => Num(0.0),
            Var(s) => Num(if s == v { 1.0 } else { 0.0 }),
            Neg(a) => -a.diff_raw(v),
            Add(a, b) => a.diff_raw(v) + b.diff_raw(v),
            Sub(a, b) => a.diff_raw(v) - b.diff_raw(v),
            Mul(a, b) => a.diff_raw(v) * (**b).clone() + (**a).clone() * b.diff_raw(v),
            Div(a, b) => {
                (a.diff_raw(v) * (**b).clone() - (**a).clone() * b.diff_raw(v)) / (**b).clone().pow(2)
            }
            Pow(a, n) => {
                if *n == 0 {
                    Num(0.0)
                } else {
                    Num(*n as f64) * (**a).clone().pow(n - 1) * a.diff_raw(v)
                }
            }
            Call(f, a) => {
                let inner = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, inner),
                    Func::Cos => -Expr::call(Func::Sin, inner),
                    Func::Exp => Expr::call(Func::Exp, inner),
                    Func::Tanh => Num(1.0) - Expr::call(Func::Tanh, inner).pow(2),
                };
                outer * a.diff_raw(v)
            }
        }
    }

    /// Polynomial normal form, if the expression is a polynomial (division
    /// only by constants, non-negative powers, no functions).
    pub fn to_poly(&self) -> Option<Poly> {
        Some(match self {
            Num(v) => Poly::constant(*v),
            Var(s) => Poly::var(s),
            Neg(a) => a.to_poly()?.scale(-1.0),
            Add(a, b) => a.to_poly()?.add(&b.to_poly()?),
            Sub(a, b) => a.to_poly()?.add(&b.to_poly()?.scale(-1.0)),
            Mul(a, b) => a.to_poly()?.mul(&b.to_poly()?),
            Div(a, b) => {
                let d = b.to_poly()?.as_constant()?;
                if d == 0.0 {
                    return None;
                }
                a.to_poly()?.scale(1.0 / d)
            }
            Pow(a, n) if *n >= 0 => {
                let base = a.to_poly()?;
                let mut out = Poly::constant(1.0);
                for _ in 0..*n {
                    out = out.mul(&base);
                }
                out
            }
            _ => return None,
        })
    }

    /// True if every partial derivative in `vars` is free of `vars`.
    pub fn is_affine_in(&self, vars: &[String]) -> bool {
        if let Some(p) = self.to_poly() {
            return p.degree_in(vars) <= 1;
        }
        vars.iter().all(|v| {
            let d = self.diff(v);
            d.free_vars().iter().all(|x| !vars.contains(x))
        })
    }

    fn prec(&self) -> u8 {
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 3,
            Pow(..) => 4,
            _ => 5,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |e: &Expr, f: &mut fmt::Formatter<'_>, paren: bool| -> fmt::Result {
            if paren {
                write!(f, "(")?;
                e.write(f)?;
                write!(f, ")")
            } else {
                e.write(f)
            }
        };
        match self {
            Num(v) => write!(f, "{v}"),
            Var(s) => write!(f, "{s}"),
            Neg(a) => {
                write!(f, "-")?;
                wrap(a, f, a.prec() < 3 || matches!(**a, Num(_)))
            }
            Add(a, b) | Sub(a, b) => {
                wrap(a, f, a.prec() < 1)?;
                write!(f, " {} ", if matches!(self, Add(..)) { "+" } else { "-" })?;
                wrap(b, f, b.prec() <= 1)
            }
            Mul(a, b) | Div(a, b) => {
                wrap(a, f, a.prec() < 2)?;
                write!(f, " {} ", if matches!(self, Mul(..)) { "*" } else { "/" })?;
                wrap(b, f, b.prec() <= 2)
            }
            Pow(a, n) => {
                wrap(a, f, a.prec() <= 4)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Call(g, a) => {
                write!(f, "{}(", g.name())?;
                a.write(f)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f)
    }
}

/// Sparse polynomial: monomial (sorted variable powers) to coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub BTreeMap<Vec<(String, u32)>, f64>);

impl Poly {
    pub fn constant(c: f64) -> Poly {
        let mut m = BTreeMap::new();
        if c != 0.0 {
            m.insert(Vec::new(), c);
        }
        Poly(m)
    }

    pub fn var(s: &str) -> Poly {
        Poly(std::iter::once((vec![(s.to_string(), 1)], 1.0)).collect())
    }

    fn insert(&mut self, k: Vec<(String, u32)>, c: f64) {
        let e = self.0.entry(k).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.0.retain(|_, v| *v != 0.0);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, &c) in &o.0 {
            out.insert(k.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::default();
        for (k, &c) in &self.0 {
            out.insert(k.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (k1, &c1) in &self.0 {
            for (k2, &c2) in &o.0 {
                let mut m: BTreeMap<String, u32> = k1.iter().cloned().collect();
                for (v, p) in k2 {
                    *m.entry(v.clone()).or_insert(0) += p;
                }
                out.insert(m.into_iter().collect(), c1 * c2);
            }
        }
        out
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.0.len() {
            0 => Some(0.0),
            1 => self.0.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    pub fn degree_in(&self, vars: &[String]) -> u32 {
        self.0
            .keys()
            .map(|m| m.iter().filter(|(v, _)| vars.contains(v)).map(|(_, p)| p).sum())
            .max()
            .unwrap_or(0)
    }

    /// Coefficient-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, o: &Poly, tol: f64) -> bool {
        let keys: BTreeSet<&Vec<(String, u32)>> = self.0.keys().chain(o.0.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.0.get(k).copied().unwrap_or(0.0);
            let b = o.0.get(k).copied().unwrap_or(0.0);
            (a - b).abs() <= tol
        })
    }
}

/// Symbolic equality of two polynomial expressions.
pub fn poly_equal(a: &Expr, b: &Expr, tol: f64) -> bool {
    match (a.to_poly(), b.to_poly()) {
        (Some(p), Some(q)) => p.approx_eq(&q, tol),
        _ => false,
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<(Tok, usize, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (l, c0) = (line, col);
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Parse { line: l, col: c0, msg: format!("bad number `{s}`") })?;
            col += i - start;
            out.push((Tok::Num(v), l, c0));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.' | '\'')) {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), l, c0));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Sym(c), l, c0));
            i += 1;
            col += 1;
        } else {
            return Err(Error::Parse { line: l, col: c0, msg: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, line, col));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].1, self.toks[self.pos].2)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = e + self.term()?;
            } else if self.eat('-') {
                e = e - self.term()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = e * self.unary()?;
            } else if self.eat('/') {
                e = e / self.unary()?;
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Num(v) => Num(-v),
                e => -e,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.next() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            _ => {
                self.pos -= 1;
                return self.err("exponent must be an integer");
            }
        };
        if paren {
            self.expect(')')?;
        }
        Ok(base.pow(if neg { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr> {
        let (line, col) = self.here();
        match self.next() {
            Tok::Num(v) => Ok(Num(v)),
            Tok::Ident(s) => {
                if self.eat('(') {
                    let f = Func::from_name(&s)
                        .ok_or(Error::Parse { line, col, msg: format!("unknown function `{s}`") })?;
                    let a = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::call(f, a))
                } else {
                    Ok(Var(s))
                }
            }
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => Err(Error::Parse { line, col, msg: "unexpected end of expression".into() }),
            t => Err(Error::Parse { line, col, msg: format!("unexpected token {t:?}") }),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    parse_at(text, 1, 1)
}

/// Parse with positions reported relative to `line`, `col`.
pub fn parse_at(text: &str, line: usize, col: usize) -> Result<Expr> {
    let mut lx = Lexer { toks: lex(text, line, col)?, pos: 0 };
    let e = lx.sum()?;
    if *lx.peek() != Tok::End {
        return lx.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(e: &Expr, vars: &[(&str, f64)]) -> f64 {
        e.eval(&|s: &str| vars.iter().find(|(n, _)| *n == s).map(|p| p.1)).unwrap()
    }

    #[test]
    fn parse_three_terms() {
        let e = parse("2*x - 3*b1 + a").unwrap();
        match &e {
            Add(l, r) => {
                assert_eq!(**r, var("a"));
                assert!(matches!(**l, Sub(..)));
            }
            _ => panic!("{e:?}"),
        }
        assert_eq!(ev(&e, &[("x", 1.0), ("b1", 1.0), ("a", 1.0)]), 0.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x + a").unwrap(), -var("x") + var("a"));
        assert_eq!(parse("-x^2").unwrap(), -(var("x").pow(2)));
        assert_eq!(parse("a - b - c").unwrap(), (var("a") - var("b")) - var("c"));
        assert_eq!(parse("a / b / c").unwrap(), (var("a") / var("b")) / var("c"));
        assert_eq!(parse("x^-2").unwrap(), var("x").pow(-2));
        assert_eq!(parse("x^(-2)").unwrap(), var("x").pow(-2));
    }

    #[test]
    fn eval_basics() {
        assert_eq!(ev(&parse("sin(x^2)").unwrap(), &[("x", 0.0)]), 0.0);
        assert_eq!(ev(&parse("exp(0)").unwrap(), &[]), 1.0);
        assert_eq!(ev(&parse("2.5").unwrap(), &[]), 2.5);
        assert!(matches!(parse("1/x").unwrap().eval(&|_| Some(0.0)), Err(Error::NonFinite(_))));
        assert!(matches!(parse("y").unwrap().eval(&|_| None), Err(Error::UnboundVariable(_))));
    }

    #[test]
    fn parse_errors_have_positions() {
        match parse("2 * (x + ") {
            Err(Error::Parse { line: 1, col, .. }) => assert_eq!(col, 10),
            r => panic!("{r:?}"),
        }
        match parse("foo(x)") {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("unknown function")),
            r => panic!("{r:?}"),
        }
        assert!(parse("x^1.5").is_err());
        assert!(parse("x $ y").is_err());
    }

    #[test]
    fn derivative_examples() {
        let e = parse("2*x - 3*b1 + a").unwrap();
        assert_eq!(e.diff("x"), Num(2.0));
        assert_eq!(e.diff("b1"), Num(-3.0));
        assert_eq!(parse("7").unwrap().diff("x"), Num(0.0));
    }

    #[test]
    fn round_trip_examples() {
        for s in [
            "a - (b - c)",
            "a / (b * c)",
            "-(x + 1)",
            "(-2)^3",
            "--x",
            "x^(-2) * tanh(y)",
            "a * -2",
            "(a + b)^2",
            "-x^2",
            "1e-7 * x",
        ] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{s} printed as {e}");
        }
    }

    #[test]
    fn affine_detection() {
        let xs = vec!["x".to_string(), "y".to_string()];
        assert!(parse("2*x - 3*y + a*a").unwrap().is_affine_in(&xs));
        assert!(!parse("x*y").unwrap().is_affine_in(&xs));
        assert!(parse("x*x - x*x + y").unwrap().is_affine_in(&xs));
        assert!(parse("sin(a) * x").unwrap().is_affine_in(&xs));
        assert!(!parse("sin(x)").unwrap().is_affine_in(&xs));
    }

    #[test]
    fn polynomial_equality() {
        assert!(poly_equal(&parse("2*x - 3*x + a").unwrap(), &parse("-x + a").unwrap(), 1e-12));
        assert!(!poly_equal(&parse("x").unwrap(), &parse("x + 1").unwrap(), 1e-12));
    }
}
