//! Scalar rings: exact rationals and IEEE doubles behind one trait.
//!
//! [`Rational`] keeps numerator and denominator in machine words while they
//! fit and falls back to arbitrary precision otherwise. Jet and tensor code is
//! generic over [`Scalar`], so the exact and floating paths share one
//! implementation.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse {0:?} as a number")]
    Parse(String),
}

/// A commutative field the jet machinery can run on.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static {
    /// True for rings where equality with zero is decided exactly.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_zero(&self) -> bool;

    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn div_ref(&self, o: &Self) -> Result<Self, ScalarError>;

    fn to_f64(&self) -> f64;

    fn add_assign_ref(&mut self, o: &Self) {
        *self = self.add_ref(o);
    }

    fn sub_assign_ref(&mut self, o: &Self) {
        *self = self.sub_ref(o);
    }

    /// `self += a * b`
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let p = a.mul_ref(b);
        self.add_assign_ref(&p);
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Zero test used by every "vanishes" decision: exact rings ignore the
    /// tolerance, floating rings compare against `tol * scale`.
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol * scale.max(f64::MIN_POSITIVE)
        }
    }
}

/// Exact rational number in lowest terms with a positive denominator.
#[derive(Clone)]
pub enum Rational {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    pub fn integer(v: i64) -> Self {
        if v == i64::MIN {
            return Self::from_big(BigRational::from_integer(BigInt::from(v)));
        }
        Rational::Small(v, 1)
    }

    /// `num / den`, reduced. Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    fn from_i128(mut n: i128, mut d: i128) -> Self {
        debug_assert!(d != 0);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Rational::Small(0, 1);
        }
        let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
        if g > 1 {
            n /= g;
            d /= g;
        }
        if fits(n) && fits(d) {
            Rational::Small(n as i64, d as i64)
        } else {
            Rational::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))
        }
    }

    /// Demotes to the word representation whenever possible.
    pub fn from_big(q: BigRational) -> Self {
        let q = if q.denom().is_negative() { -q } else { q };
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => Rational::Small(n, d),
            _ => Rational::Big(Box::new(q)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rational::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rational::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rational::Small(n, _) => BigInt::from(*n),
            Rational::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rational::Small(_, d) => BigInt::from(*d),
            Rational::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rational::Small(_, d) => *d == 1,
            Rational::Big(b) => b.is_integer(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Rational::Small(n, _) => n.signum() as i32,
            Rational::Big(b) => {
                if b.is_positive() {
                    1
                } else if b.is_negative() {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self, ScalarError> {
        Rational::integer(1).div_ref(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Rational::integer(1);
        for _ in 0..e {
            acc = acc.mul_ref(self);
        }
        acc
    }

    fn big_op(&self, o: &Self, f: impl FnOnce(BigRational, BigRational) -> BigRational) -> Self {
        Self::from_big(f(self.to_big(), o.to_big()))
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rational::Small(0, 1)
    }

    fn one() -> Self {
        Rational::Small(1, 1)
    }

    fn from_i64(v: i64) -> Self {
        Rational::integer(v)
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn is_zero(&self) -> bool {
        matches!(self, Rational::Small(0, _))
    }

    fn add_ref(&self, o: &Self) -> Self {
        match (self, o) {
            (Rational::Small(0, _), _) => o.clone(),
            (_, Rational::Small(0, _)) => self.clone(),
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                if b == d {
                    Self::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Self::from_i128(a * d + c * b, b * d)
                }
            }
            _ => self.big_op(o, |x, y| x + y),
        }
    }

    fn sub_ref(&self, o: &Self) -> Self {
        match (self, o) {
            (_, Rational::Small(0, _)) => self.clone(),
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                if b == d {
                    Self::from_i128(*a as i128 - *c as i128, *b as i128)
                } else {
                    let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                    Self::from_i128(a * d - c * b, b * d)
                }
            }
            _ => self.big_op(o, |x, y| x - y),
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        match (self, o) {
            (Rational::Small(0, _), _) | (_, Rational::Small(0, _)) => Rational::zero(),
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                // cross-reduce so the product is already in lowest terms
                let g1 = gcd_u64(a.unsigned_abs(), *d as u64) as i64;
                let g2 = gcd_u64(c.unsigned_abs(), *b as u64) as i64;
                let n = (*a / g1) as i128 * (*c / g2) as i128;
                let den = (*b / g2) as i128 * (*d / g1) as i128;
                if fits(n) && fits(den) {
                    Rational::Small(n as i64, den as i64)
                } else {
                    Rational::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(den))))
                }
            }
            _ => self.big_op(o, |x, y| x * y),
        }
    }

    fn neg_ref(&self) -> Self {
        match self {
            Rational::Small(n, d) => Rational::Small(-n, *d),
            Rational::Big(b) => Self::from_big(-(**b).clone()),
        }
    }

    fn div_ref(&self, o: &Self) -> Result<Self, ScalarError> {
        if o.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let inv = match o {
            Rational::Small(n, d) => {
                if *n < 0 {
                    Rational::Small(-d, -n)
                } else {
                    Rational::Small(*d, *n)
                }
            }
            Rational::Big(b) => Self::from_big(b.recip()),
        };
        Ok(self.mul_ref(&inv))
    }

    fn to_f64(&self) -> f64 {
        match self {
            Rational::Small(n, d) => *n as f64 / *d as f64,
            Rational::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Rational::Small(a, b), Rational::Small(c, d)) => a == c && b == d,
            (Rational::Big(x), Rational::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Small(n, 1) => write!(f, "{n}"),
            Rational::Small(n, d) => write!(f, "{n}/{d}"),
            Rational::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Rational::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Accepts `p`, `p/q` and plain decimals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScalarError::Parse(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            return Ok(Self::from_big(BigRational::new(p, q)));
        }
        if let Some((int, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let neg = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
            let mut n: BigInt = digits.parse().map_err(|_| err())?;
            if neg {
                n = -n;
            }
            let d = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Self::from_big(BigRational::new(n, d)));
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Self::from_big(BigRational::from_integer(n)))
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_rational(q: &Rational) -> Self {
        q.to_f64()
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }

    fn sub_ref(&self, o: &Self) -> Self {
        self - o
    }

    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }

    fn neg_ref(&self) -> Self {
        -self
    }

    fn div_ref(&self, o: &Self) -> Result<Self, ScalarError> {
        if *o == 0.0 {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// `n!` as a rational, for the `1/k!` normalisations.
pub fn factorial<F: Scalar>(n: usize) -> F {
    let mut acc = F::one();
    for i in 2..=n {
        acc = acc.mul_ref(&F::from_i64(i as i64));
    }
    acc
}
