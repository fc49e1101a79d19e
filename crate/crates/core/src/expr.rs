//! Rational-function expressions in chart coordinates.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' uint)?
//! atom   := number | 'x' uint | '(' expr ')'
//! number := digits ('.' digits)?
//! ```
//!
//! Coordinates are `x1 … xn`. Expressions evaluate to jets at a point and
//! can be differentiated symbolically.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    /// Zero-based coordinate index.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in `{}`", self.pos, String::from_utf8_lossy(self.s)))
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap()
    }

    fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let d = self.digits();
        if d.is_empty() {
            return Err(self.err("expected an unsigned integer"));
        }
        d.parse().map_err(|_| self.err("integer too large"))
    }

    fn expr(&mut self) -> Result<Expr> {
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

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.uint()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let i = self.uint()? as usize;
                if i == 0 || i > self.nvars {
                    return Err(self.err(&format!("coordinate x{i} outside x1..x{}", self.nvars)));
                }
                Ok(Expr::Var(i - 1))
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                self.digits();
                if self.s.get(self.pos) == Some(&b'.') {
                    self.pos += 1;
                    if self.digits().is_empty() {
                        return Err(self.err("expected digits after `.`"));
                    }
                }
                let lit = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                lit.parse::<Rational>().map(Expr::Num).map_err(|_| self.err("bad number"))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn num(v: i64) -> Expr {
    Expr::Num(Rational::integer(v))
}

impl Expr {
    /// Parses an expression in the coordinates `x1..x{nvars}`.
    pub fn parse(s: &str, nvars: usize) -> Result<Expr> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, nvars };
        let e = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn constant(q: Rational) -> Expr {
        Expr::Num(q)
    }

    fn as_num(&self) -> Option<&Rational> {
        match self {
            Expr::Num(q) => Some(q),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_num().is_some_and(Rational::is_zero)
    }

    fn is_one(&self) -> bool {
        self.as_num().is_some_and(Scalar::is_one)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x.add_ref(y)),
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x.sub_ref(y)),
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x.mul_ref(y)),
            _ if a.is_zero() || b.is_zero() => num(0),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return num(0);
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(q) => Expr::Num(q.neg_ref()),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Expr, e: u32) -> Expr {
        match e {
            0 => num(1),
            1 => a,
            _ => match a.as_num() {
                Some(q) => Expr::Num(q.pow(e)),
                None => Expr::Pow(Box::new(a), e),
            },
        }
    }

    /// Symbolic `∂/∂x_var`.
    pub fn derivative(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => num(0),
            Expr::Var(v) => num((*v == var) as i64),
            Expr::Add(a, b) => Expr::add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(var), b.derivative(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(var), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => {
                // (a'b − ab')/b²
                let da = a.derivative(var);
                let db = b.derivative(var);
                if db.is_zero() {
                    return Expr::div(da, (**b).clone());
                }
                Expr::div(
                    Expr::sub(Expr::mul(da, (**b).clone()), Expr::mul((**a).clone(), db)),
                    Expr::pow((**b).clone(), 2),
                )
            }
            Expr::Neg(a) => Expr::neg(a.derivative(var)),
            Expr::Pow(_, 0) => num(0),
            Expr::Pow(a, e) => Expr::mul(
                Expr::mul(num(*e as i64), Expr::pow((**a).clone(), e - 1)),
                a.derivative(var),
            ),
        }
    }

    /// Jet of the expression about `point`. Division by a function vanishing
    /// at the point is an evaluation singularity.
    pub fn eval<F: Scalar>(&self, point: &[F], order: usize) -> Result<Jet<F>> {
        let n = point.len();
        Ok(match self {
            Expr::Num(q) => Jet::constant(n, order, F::from_rational(q)),
            Expr::Var(v) => Jet::variable(n, order, *v, point[*v].clone()),
            Expr::Add(a, b) => &a.eval(point, order)? + &b.eval(point, order)?,
            Expr::Sub(a, b) => &a.eval(point, order)? - &b.eval(point, order)?,
            Expr::Mul(a, b) => &a.eval(point, order)? * &b.eval(point, order)?,
            Expr::Div(a, b) => {
                let den = b.eval(point, order)?;
                a.eval(point, order)?
                    .div_jet(&den)
                    .map_err(|_| Error::Singular(format!("denominator `{b}` vanishes at {}", fmt_point(point))))?
            }
            Expr::Neg(a) => a.eval(point, order)?.neg_jet(),
            Expr::Pow(a, e) => a.eval(point, order)?.powi(*e),
        })
    }

    /// Highest coordinate index used, plus one.
    pub fn nvars_used(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(v) => v + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.nvars_used().max(b.nvars_used())
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.nvars_used(),
        }
    }
}

fn fmt_point<F: Scalar>(p: &[F]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) if q.signum() < 0 || !q.is_integer() => write!(f, "({q})"),
            Expr::Num(q) => write!(f, "{q}"),
            Expr::Var(v) => write!(f, "x{}", v + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/({b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, e) => match **a {
                Expr::Var(_) => write!(f, "{a}^{e}"),
                _ => write!(f, "({a})^{e}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_evaluates() {
        let e = Expr::parse("1/2*x1^2 - (x2 + 3)/x1 + 0.25", 2).unwrap();
        let j = e.eval(&[q("2"), q("-1")], 0).unwrap();
        assert_eq!(*j.value(), q("5/4"));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["x0", "x3", "1 +", "(x1", "x1 ^ -2", "2 $ 3", "1.", "x1 x2"] {
            assert!(matches!(Expr::parse(bad, 2), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn singular_denominator_is_reported() {
        let e = Expr::parse("1/(x1 - 1)", 1).unwrap();
        assert!(matches!(e.eval(&[q("1")], 2), Err(Error::Singular(_))));
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("-3/4*x1^2/(1 + x2^2) - x2", 2).unwrap();
        let again = Expr::parse(&e.to_string(), 2).unwrap();
        let p = [q("1/3"), q("5/7")];
        assert_eq!(e.eval(&p, 3).unwrap(), again.eval(&p, 3).unwrap());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-4i64..5).prop_map(num),
            (0usize..2).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                // keep denominators away from zero on the sampled box
                inner.clone().prop_map(|a| Expr::Div(
                    Box::new(num(1)),
                    Box::new(Expr::Add(Box::new(num(3)), Box::new(Expr::Pow(Box::new(a), 2))))
                )),
                (inner, 0u32..3).prop_map(|(a, e)| Expr::Pow(Box::new(a), e)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        /// Jet coefficients equal symbolic partial derivatives up to order 4.
        #[test]
        fn jets_match_symbolic_derivatives(e in arb_expr(), a in -3i64..4, b in -3i64..4) {
            let p = [Rational::new(a, 2), Rational::new(b, 3)];
            let jet = e.eval(&p, 4).unwrap();
            let mut stack = vec![(e.clone(), vec![0u8, 0u8])];
            while let Some((d, alpha)) = stack.pop() {
                let deg: u8 = alpha.iter().sum();
                let want = d.eval(&p, 0).unwrap().value().clone();
                prop_assert_eq!(jet.derivative(&alpha).unwrap(), want);
                if deg < 4 {
                    // differentiate in canonical order only (x1 first, then x2)
                    if alpha[1] == 0 {
                        stack.push((d.derivative(0), vec![alpha[0] + 1, 0]));
                    }
                    stack.push((d.derivative(1), vec![alpha[0], alpha[1] + 1]));
                }
            }
        }
    }
}
