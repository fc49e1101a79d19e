//! Truncated multivariate Taylor expansions ("jets") of scalar fields.
//!
//! A jet of order `k` in `n` variables stores the Taylor coefficients
//! `c_α = ∂^α f(x₀) / α!` for every multi-index `|α| ≤ k`. Monomials are laid
//! out in graded order, so the coefficients of an order-`j` truncation are a
//! prefix of those of any higher order. All index tables live in a per-`n`
//! [`Layout`] that is built once and shared.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use crate::scalar::{Scalar, ScalarError};

/// Highest truncation order supported.
pub const MAX_ORDER: usize = 4;

/// Index tables for jets in a fixed number of variables.
#[derive(Debug)]
pub struct Layout {
    n: usize,
    exps: Vec<Vec<u8>>,
    /// `counts[k]` = number of monomials of degree `<= k`.
    counts: [usize; MAX_ORDER + 1],
    /// Product triples `(i, j, out)` sorted by `out`.
    mul: Vec<(u32, u32, u32)>,
    /// `mul_end[k]` = number of triples whose output has degree `<= k`.
    mul_end: [usize; MAX_ORDER + 1],
    /// `raise[m * n + v]` = index of `m + e_v`, if within `MAX_ORDER`.
    raise: Vec<Option<u32>>,
    index: HashMap<Vec<u8>, usize>,
}

fn monomials_of_degree(n: usize, d: usize) -> Vec<Vec<u8>> {
    fn rec(n: usize, var: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if var + 1 == n {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u8);
            rec(n, var + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, 0, d, &mut Vec::new(), &mut out);
    out
}

impl Layout {
    fn build(n: usize) -> Layout {
        let mut exps = Vec::new();
        let mut counts = [0; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            exps.extend(monomials_of_degree(n, d));
            counts[d] = exps.len();
        }
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (k, ek) in exps.iter().enumerate() {
            for (i, ei) in exps.iter().enumerate() {
                if deg(ei) > deg(ek) || ei.iter().zip(ek).any(|(a, b)| a > b) {
                    continue;
                }
                let ej: Vec<u8> = ek.iter().zip(ei).map(|(b, a)| b - a).collect();
                let j = index[&ej];
                mul.push((i as u32, j as u32, k as u32));
            }
        }
        let mut mul_end = [0; MAX_ORDER + 1];
        for (d, end) in mul_end.iter_mut().enumerate() {
            *end = mul.iter().filter(|t| (t.2 as usize) < counts[d]).count();
        }

        let mut raise = vec![None; exps.len() * n];
        for (m, e) in exps.iter().enumerate() {
            for v in 0..n {
                let mut up = e.clone();
                up[v] += 1;
                raise[m * n + v] = index.get(&up).map(|&i| i as u32);
            }
        }
        Layout { n, exps, counts, mul, mul_end, raise, index }
    }

    /// Shared layout for `n` variables.
    pub fn get(n: usize) -> &'static Layout {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static Layout>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        *guard.entry(n).or_insert_with(|| Box::leak(Box::new(Layout::build(n))))
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    /// Number of coefficients of an order-`k` jet.
    pub fn len(&self, order: usize) -> usize {
        self.counts[order]
    }

    pub fn exponents(&self, m: usize) -> &[u8] {
        &self.exps[m]
    }

    pub fn position(&self, alpha: &[u8]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

/// Truncated Taylor expansion of a scalar field about a base point.
#[derive(Clone)]
pub struct Jet<F> {
    layout: &'static Layout,
    order: usize,
    c: Vec<F>,
}

impl<F: Scalar> Jet<F> {
    pub fn zero(n: usize, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let layout = Layout::get(n);
        Jet { layout, order, c: vec![F::zero(); layout.len(order)] }
    }

    pub fn constant(n: usize, order: usize, v: F) -> Self {
        let mut j = Self::zero(n, order);
        j.c[0] = v;
        j
    }

    /// The coordinate function `x_var` expanded about a point whose
    /// `var`-th coordinate is `base`.
    pub fn variable(n: usize, order: usize, var: usize, base: F) -> Self {
        assert!(var < n);
        let mut j = Self::constant(n, order, base);
        if order >= 1 {
            j.c[1 + var] = F::one();
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients in layout order.
    pub fn from_coeffs(n: usize, order: usize, coeffs: Vec<F>) -> Self {
        let layout = Layout::get(n);
        assert_eq!(coeffs.len(), layout.len(order), "coefficient count mismatch");
        Jet { layout, order, c: coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.layout.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    /// Value at the base point.
    pub fn value(&self) -> &F {
        &self.c[0]
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn taylor_coeff(&self, alpha: &[u8]) -> Option<&F> {
        self.layout.position(alpha).filter(|&m| m < self.c.len()).map(|m| &self.c[m])
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, alpha: &[u8]) -> Option<F> {
        let c = self.taylor_coeff(alpha)?;
        let mut f = c.clone();
        for &a in alpha {
            for k in 2..=a as i64 {
                f = f.mul_ref(&F::from_i64(k));
            }
        }
        Some(f)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Scalar::is_zero)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet { layout: self.layout, order, c: self.c[..self.layout.len(order)].to_vec() }
    }

    fn check_same_space(&self, o: &Self) {
        assert_eq!(self.layout.n, o.layout.n, "jets over different numbers of variables");
    }

    pub fn map(&self, f: impl Fn(&F) -> F) -> Self {
        Jet { layout: self.layout, order: self.order, c: self.c.iter().map(f).collect() }
    }

    pub fn add_jet(&self, o: &Self) -> Self {
        self.check_same_space(o);
        let order = self.order.min(o.order);
        let len = self.layout.len(order);
        let c = self.c[..len].iter().zip(&o.c[..len]).map(|(a, b)| a.add_ref(b)).collect();
        Jet { layout: self.layout, order, c }
    }

    pub fn sub_jet(&self, o: &Self) -> Self {
        self.check_same_space(o);
        let order = self.order.min(o.order);
        let len = self.layout.len(order);
        let c = self.c[..len].iter().zip(&o.c[..len]).map(|(a, b)| a.sub_ref(b)).collect();
        Jet { layout: self.layout, order, c }
    }

    pub fn neg_jet(&self) -> Self {
        self.map(Scalar::neg_ref)
    }

    pub fn scale(&self, s: &F) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars(), self.order);
        }
        self.map(|x| x.mul_ref(s))
    }

    /// In-place `self += o`, truncating to the lower order.
    pub fn add_assign_jet(&mut self, o: &Self) {
        self.check_same_space(o);
        if o.order < self.order {
            self.order = o.order;
            self.c.truncate(self.layout.len(o.order));
        }
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            if !b.is_zero() {
                a.add_assign_ref(b);
            }
        }
    }

    pub fn sub_assign_jet(&mut self, o: &Self) {
        self.check_same_space(o);
        if o.order < self.order {
            self.order = o.order;
            self.c.truncate(self.layout.len(o.order));
        }
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            if !b.is_zero() {
                a.sub_assign_ref(b);
            }
        }
    }

    /// In-place `self += a * b`, truncating to the lowest order involved.
    pub fn mul_acc(&mut self, a: &Self, b: &Self) {
        self.check_same_space(a);
        self.check_same_space(b);
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            self.order = order;
            self.c.truncate(self.layout.len(order));
        }
        for &(i, j, k) in &self.layout.mul[..self.layout.mul_end[order]] {
            let (x, y) = (&a.c[i as usize], &b.c[j as usize]);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            self.c[k as usize].mul_acc(x, y);
        }
    }

    pub fn mul_jet(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = Self::zero(self.nvars(), order);
        out.mul_acc(self, o);
        out
    }

    /// Multiplicative inverse; requires a nonzero value at the base point.
    pub fn recip(&self) -> Result<Self, ScalarError> {
        let f0 = &self.c[0];
        let inv0 = F::one().div_ref(f0)?;
        // 1/f = (1/f0) Σ_m (-h/f0)^m with h = f - f0, nilpotent past the order.
        let mut h = self.scale(&inv0.neg_ref());
        h.c[0] = F::zero();
        let mut term = Self::constant(self.nvars(), self.order, F::one());
        let mut acc = term.clone();
        for _ in 0..self.order {
            term = term.mul_jet(&h);
            acc.add_assign_jet(&term);
        }
        Ok(acc.scale(&inv0))
    }

    pub fn div_jet(&self, o: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul_jet(&o.recip()?))
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars(), self.order, F::one());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        acc
    }

    /// `∂f/∂x_var`, one order lower. Panics on an order-0 jet.
    pub fn partial(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.nvars();
        let order = self.order - 1;
        let len = self.layout.len(order);
        let mut c = Vec::with_capacity(len);
        for m in 0..len {
            let up = self.layout.raise[m * n + var].expect("raised monomial within MAX_ORDER") as usize;
            let e = self.layout.exps[m][var] as i64 + 1;
            let v = &self.c[up];
            c.push(if e == 1 || v.is_zero() { v.clone() } else { v.mul_ref(&F::from_i64(e)) });
        }
        Jet { layout: self.layout, order, c }
    }

    /// Evaluates the Taylor polynomial at displacement `dx` from the base point.
    pub fn eval_polynomial(&self, dx: &[F]) -> F {
        let mut acc = F::zero();
        for (m, c) in self.c.iter().enumerate() {
            let mut t = c.clone();
            for (v, &e) in self.layout.exps[m].iter().enumerate() {
                for _ in 0..e {
                    t = t.mul_ref(&dx[v]);
                }
            }
            acc.add_assign_ref(&t);
        }
        acc
    }

    pub fn convert<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Jet<G> {
        Jet { layout: self.layout, order: self.order, c: self.c.iter().map(f).collect() }
    }
}

impl<F: Scalar> PartialEq for Jet<F> {
    fn eq(&self, o: &Self) -> bool {
        self.layout.n == o.layout.n && self.order == o.order && self.c == o.c
    }
}

impl<F: Scalar> fmt::Debug for Jet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "Jet[o{}](", self.order)?;
        for (m, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (v, &e) in self.layout.exps[m].iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·dx{}", v + 1)?,
                    _ => write!(f, "·dx{}^{e}", v + 1)?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl<'a, F: Scalar> Add for &'a Jet<F> {
    type Output = Jet<F>;
    fn add(self, o: Self) -> Jet<F> {
        self.add_jet(o)
    }
}

impl<'a, F: Scalar> Sub for &'a Jet<F> {
    type Output = Jet<F>;
    fn sub(self, o: Self) -> Jet<F> {
        self.sub_jet(o)
    }
}

impl<'a, F: Scalar> Mul for &'a Jet<F> {
    type Output = Jet<F>;
    fn mul(self, o: Self) -> Jet<F> {
        self.mul_jet(o)
    }
}

impl<'a, F: Scalar> Neg for &'a Jet<F> {
    type Output = Jet<F>;
    fn neg(self) -> Jet<F> {
        self.neg_jet()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn layout_is_graded_and_prefix_stable() {
        let l = Layout::get(3);
        assert_eq!(l.len(0), 1);
        assert_eq!(l.len(1), 4);
        assert_eq!(l.len(2), 10);
        assert_eq!(l.len(4), 35);
        for m in 0..l.len(4) {
            let d: usize = l.exponents(m).iter().map(|&e| e as usize).sum();
            let lo = (0..=MAX_ORDER).find(|&k| m < l.len(k)).unwrap();
            assert_eq!(d, lo);
        }
    }

    #[test]
    fn product_truncates_to_lower_order() {
        let x = Jet::<Rational>::variable(2, 2, 0, q("1/2"));
        let y = Jet::<Rational>::variable(2, 1, 1, q("3"));
        let p = &x * &y;
        assert_eq!(p.order(), 1);
        // (1/2 + dx)(3 + dy) = 3/2 + 3dx + 1/2 dy + ...
        assert_eq!(*p.value(), q("3/2"));
        assert_eq!(p.derivative(&[1, 0]), Some(q("3")));
        assert_eq!(p.derivative(&[0, 1]), Some(q("1/2")));
    }

    #[test]
    fn partial_lowers_order_by_one() {
        let x = Jet::<Rational>::variable(2, 4, 0, q("2"));
        let c = x.powi(3); // x^3 about x=2
        let d = c.partial(0);
        assert_eq!(d.order(), 3);
        assert_eq!(*d.value(), q("12"));
        assert_eq!(d.derivative(&[1, 0]), Some(q("12")));
        assert_eq!(d.derivative(&[2, 0]), Some(q("6")));
        assert_eq!(d.derivative(&[3, 0]), Some(q("0")));
    }

    #[test]
    fn reciprocal_inverts_and_rejects_zero_value() {
        let n = 3;
        let x = Jet::<Rational>::variable(n, 4, 0, q("1"));
        let y = Jet::<Rational>::variable(n, 4, 2, q("-1/3"));
        let f = &(&x * &x) + &y; // 1 - 1/3 + ...
        let g = f.recip().unwrap();
        assert_eq!(&f * &g, Jet::constant(n, 4, Rational::one()));
        let z = Jet::<Rational>::variable(n, 4, 1, Rational::zero());
        assert!(z.recip().is_err());
    }

    #[test]
    fn derivative_scales_by_factorials() {
        // e(x) = x^2 y about the origin: ∂x∂x∂y = 2
        let x = Jet::<Rational>::variable(2, 4, 0, Rational::zero());
        let y = Jet::<Rational>::variable(2, 4, 1, Rational::zero());
        let f = &(&x * &x) * &y;
        assert_eq!(f.taylor_coeff(&[2, 1]), Some(&Rational::one()));
        assert_eq!(f.derivative(&[2, 1]), Some(q("2")));
    }
}
