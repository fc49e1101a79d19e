//! Connection sources, charts, sample points, builtin geometries and test
//! connection generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::linalg::EndomorphismDensity;
use crate::projective::{decompose, is_torsion_free, projective_shift, CONNECTION_SLOTS, CURVATURE_SLOTS};
use crate::scalar::{Rational, Scalar};
use crate::tensor::{multi_indices, Tensor, Var};

/// Coordinate box and sampling recipe.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub n: usize,
    pub bounds: Vec<(Rational, Rational)>,
    pub points: Vec<Vec<Rational>>,
    pub count: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 0x5EED_CAFE_F00D_0001;
pub const DEFAULT_COUNT: usize = 5;
/// Random sample coordinates lie on this grid inside the box.
const GRID: i64 = 16;

impl ChartSpec {
    pub fn new(bounds: Vec<(Rational, Rational)>) -> Self {
        ChartSpec { n: bounds.len(), bounds, points: vec![], count: DEFAULT_COUNT, seed: DEFAULT_SEED }
    }

    pub fn cube(n: usize, half_width: Rational) -> Self {
        Self::new(vec![(half_width.neg_ref(), half_width); n])
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=6).contains(&self.n) {
            return Err(Error::Precondition(format!("chart dimension {} outside 2..=6", self.n)));
        }
        if self.bounds.len() != self.n {
            return Err(Error::DimensionMismatch(format!("{} bounds for dimension {}", self.bounds.len(), self.n)));
        }
        for (lo, hi) in &self.bounds {
            if lo > hi {
                return Err(Error::Precondition(format!("empty interval [{lo}, {hi}]")));
            }
        }
        for p in &self.points {
            if p.len() != self.n {
                return Err(Error::DimensionMismatch(format!("point with {} coordinates", p.len())));
            }
            if p.iter().zip(&self.bounds).any(|(x, (lo, hi))| x < lo || x > hi) {
                let s: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                return Err(Error::Precondition(format!("point ({}) outside the box", s.join(", "))));
            }
        }
        Ok(())
    }

    /// Explicit points followed by `count` seeded pseudo-random grid points.
    pub fn sample_points(&self) -> Vec<Vec<Rational>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = self.points.clone();
        for _ in 0..self.count {
            out.push(
                self.bounds
                    .iter()
                    .map(|(lo, hi)| {
                        let k = rng.gen_range(1..GRID);
                        lo.add_ref(&hi.sub_ref(lo).mul_ref(&Rational::new(k, GRID)))
                    })
                    .collect(),
            );
        }
        out
    }
}

/// Metric given by rational-function coefficients `g_{ij}(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSource {
    n: usize,
    g: Vec<Expr>,
    /// `dg[l*n*n + i*n + j] = ∂_l g_{ij}`.
    dg: Vec<Expr>,
}

impl MetricSource {
    /// `g[i*n + j]`; must be symmetric.
    pub fn new(n: usize, g: Vec<Expr>) -> Result<Self> {
        if g.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} metric entries for n = {n}", g.len())));
        }
        for i in 0..n {
            for j in 0..i {
                if g[i * n + j] != g[j * n + i] {
                    return Err(Error::Precondition(format!("metric not symmetric in ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let dg = multi_indices(n, 3).map(|ix| g[ix[1] * n + ix[2]].derivative(ix[0])).collect();
        Ok(MetricSource { n, g, dg })
    }

    pub fn parse(n: usize, entries: &[String]) -> Result<Self> {
        let g = entries.iter().map(|s| Expr::parse(s, n)).collect::<Result<Vec<_>>>()?;
        Self::new(n, g)
    }

    /// Diagonal metric with the given entries.
    pub fn diagonal(diag: Vec<Expr>) -> Result<Self> {
        let n = diag.len();
        let mut g = vec![Expr::constant(Rational::zero()); n * n];
        for (i, e) in diag.into_iter().enumerate() {
            g[i * n + i] = e;
        }
        Self::new(n, g)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Expr] {
        &self.g
    }

    pub fn metric_jet<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for e in &self.g {
            data.push(e.eval(p, order)?);
        }
        Ok(Tensor::from_data(n, vec![Var::Down, Var::Down], data))
    }

    pub fn inverse_metric_jet<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        inverse_metric(&self.metric_jet(p, order)?)
    }

    /// Levi-Civita connection `½g^{il}(∂_jg_{lk} + ∂_kg_{lj} − ∂_lg_{jk})`.
    /// The metric is differentiated symbolically, so the result has the full
    /// requested order.
    pub fn levi_civita<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        let n = self.n;
        let ginv = self.inverse_metric_jet(p, order)?;
        let mut dg = Vec::with_capacity(n * n * n);
        for e in &self.dg {
            dg.push(e.eval(p, order)?);
        }
        let d = |l: usize, i: usize, j: usize| &dg[l * n * n + i * n + j];
        let half = F::one().div_ref(&F::from_i64(2))?;
        Ok(Tensor::from_fn(n, CONNECTION_SLOTS.to_vec(), |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut acc = Jet::zero(n, order);
            for l in 0..n {
                let gi = ginv.get(&[i, l]);
                if gi.is_zero() {
                    continue;
                }
                let mut s = d(j, l, k) + d(k, l, j);
                s.sub_assign_jet(d(l, j, k));
                acc.mul_acc(gi, &s);
            }
            acc.scale(&half)
        }))
    }

    /// `Γ^b_{ab}` of the Levi-Civita connection, `∂_a log √|det g|`.
    pub fn volume_form_trace<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        self.levi_civita(p, order)?.contract(0, 2)
    }
}

/// Inverse of a `[Down, Down]` metric jet, `[Up, Up]`.
pub fn inverse_metric<F: Scalar>(g: &Tensor<F>) -> Result<Tensor<F>> {
    let n = g.dim();
    let m: Vec<Vec<Jet<F>>> = (0..n).map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect()).collect();
    let (det, adj) = EndomorphismDensity::new(m, 0)?.det_adj()?;
    let inv = det.recip().map_err(|_| Error::Singular("degenerate metric".into()))?;
    Ok(Tensor::from_fn(n, vec![Var::Up, Var::Up], |ix| adj.m[ix[0]][ix[1]].mul_jet(&inv)))
}

/// A torsion-free connection given explicitly or as a Levi-Civita connection.
#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionSource {
    /// `gamma[i*n*n + j*n + k] = Γ^i_{jk}`.
    Christoffel { n: usize, gamma: Vec<Expr> },
    Metric(MetricSource),
}

impl ConnectionSource {
    pub fn christoffel(n: usize, gamma: Vec<Expr>) -> Result<Self> {
        if gamma.len() != n * n * n {
            return Err(Error::DimensionMismatch(format!("{} Christoffel entries for n = {n}", gamma.len())));
        }
        Ok(ConnectionSource::Christoffel { n, gamma })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConnectionSource::Christoffel { n, .. } => *n,
            ConnectionSource::Metric(m) => m.dim(),
        }
    }

    pub fn metric(&self) -> Option<&MetricSource> {
        match self {
            ConnectionSource::Metric(m) => Some(m),
            ConnectionSource::Christoffel { .. } => None,
        }
    }

    /// Christoffel jet at `p`; rejects connections with torsion.
    pub fn christoffel_jet<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("point of length {} for n = {}", p.len(), self.dim())));
        }
        match self {
            ConnectionSource::Christoffel { n, gamma } => {
                let mut data = Vec::with_capacity(gamma.len());
                for e in gamma {
                    data.push(e.eval(p, order)?);
                }
                let t = Tensor::from_data(*n, CONNECTION_SLOTS.to_vec(), data);
                if !is_torsion_free(&t) {
                    return Err(Error::Precondition("Christoffel symbols are not symmetric in the lower indices".into()));
                }
                Ok(t)
            }
            ConnectionSource::Metric(m) => m.levi_civita(p, order),
        }
    }
}

/// A 1-form field `Υ_i(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    pub components: Vec<Expr>,
}

impl OneFormField {
    pub fn parse(n: usize, entries: &[String]) -> Result<Self> {
        if entries.len() != n {
            return Err(Error::DimensionMismatch(format!("{} one-form components for n = {n}", entries.len())));
        }
        Ok(OneFormField { components: entries.iter().map(|s| Expr::parse(s, n)).collect::<Result<_>>()? })
    }

    pub fn jet<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        let n = self.components.len();
        let mut data = Vec::with_capacity(n);
        for e in &self.components {
            data.push(e.eval(p, order)?);
        }
        Ok(Tensor::from_data(n, vec![Var::Down], data))
    }
}

/// A connection source, optionally moved within its projective class by a
/// 1-form: `Γ̂^i_{jk} = Γ^i_{jk} + δ^i_jΥ_k + δ^i_kΥ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    pub source: ConnectionSource,
    pub shift: Option<OneFormField>,
}

impl ConnectionField {
    pub fn new(source: ConnectionSource) -> Self {
        ConnectionField { source, shift: None }
    }

    pub fn shifted(source: ConnectionSource, shift: OneFormField) -> Result<Self> {
        if shift.components.len() != source.dim() {
            return Err(Error::DimensionMismatch("shift and connection dimensions differ".into()));
        }
        Ok(ConnectionField { source, shift: Some(shift) })
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// The metric, when the field is an unshifted Levi-Civita connection.
    pub fn metric(&self) -> Option<&MetricSource> {
        self.source.metric()
    }

    pub fn christoffel_jet<F: Scalar>(&self, p: &[F], order: usize) -> Result<Tensor<F>> {
        let gamma = self.source.christoffel_jet(p, order)?;
        match &self.shift {
            None => Ok(gamma),
            Some(u) => projective_shift(&gamma, &u.jet(p, order)?),
        }
    }
}

/// Trivialization of the projective density bundle used for weighted
/// derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityFrame<F: Scalar> {
    /// The chart volume: `θ_a = Γ^b_{ab}/(n+1)`.
    Coordinate,
    /// The volume of a metric: `θ_a = (Γ^b_{ab} − Γ̊^b_{ab})/(n+1)` where
    /// `Γ̊` is its Levi-Civita connection, so `θ = 0` for `Γ̊` itself.
    MetricVolume(Tensor<F>),
}

impl<F: Scalar> DensityFrame<F> {
    pub fn of_metric(m: &MetricSource, p: &[F], order: usize) -> Result<Self> {
        Ok(DensityFrame::MetricVolume(m.volume_form_trace(p, order)?))
    }

    pub fn theta(&self, gamma: &Tensor<F>) -> Result<Tensor<F>> {
        let n = gamma.dim() as i64;
        let tr = gamma.contract(0, 2)?;
        let tr = match self {
            DensityFrame::Coordinate => tr,
            DensityFrame::MetricVolume(t) => tr.sub(t)?,
        };
        Ok(tr.scale(&F::one().div_ref(&F::from_i64(n + 1))?))
    }
}

fn monomial(exps: &[u8]) -> Expr {
    let mut acc = Expr::constant(Rational::one());
    for (v, &e) in exps.iter().enumerate() {
        acc = Expr::mul(acc, Expr::pow(Expr::Var(v), e as u32));
    }
    acc
}

/// Polynomial from `(coefficient, exponents)` terms.
pub fn polynomial(terms: &[(Rational, Vec<u8>)]) -> Expr {
    terms.iter().fold(Expr::constant(Rational::zero()), |acc, (c, e)| {
        if c.is_zero() {
            acc
        } else {
            Expr::add(acc, Expr::mul(Expr::constant(c.clone()), monomial(e)))
        }
    })
}

/// Random polynomial of degree `<= degree` with integer coefficients in
/// `-2..=2`, about half of them zero.
pub fn random_polynomial(n: usize, degree: usize, rng: &mut impl Rng) -> Expr {
    let layout = crate::jet::Layout::get(n);
    let terms: Vec<(Rational, Vec<u8>)> = (0..layout.len(degree))
        .filter_map(|m| {
            if rng.gen_bool(0.5) {
                return None;
            }
            let c = rng.gen_range(-2..=2);
            Some((Rational::integer(c), layout.exponents(m).to_vec()))
        })
        .collect();
    polynomial(&terms)
}

pub fn random_polynomial_connection(n: usize, degree: usize, rng: &mut impl Rng) -> ConnectionSource {
    let mut gamma = vec![Expr::constant(Rational::zero()); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let e = random_polynomial(n, degree, rng);
                gamma[i * n * n + j * n + k] = e.clone();
                gamma[i * n * n + k * n + j] = e;
            }
        }
    }
    ConnectionSource::Christoffel { n, gamma }
}

pub fn random_one_form(n: usize, degree: usize, rng: &mut impl Rng) -> OneFormField {
    OneFormField { components: (0..n).map(|_| random_polynomial(n, degree, rng)).collect() }
}

/// Random algebraic Weyl tensor (slots `[Down, Down, Up, Down]`, order-0
/// jets in `n` variables): a random integer tensor, skewed in its first pair,
/// with its cyclic part removed, projected to its trace-free part.
pub fn random_weyl_tensor(n: usize, rng: &mut impl Rng) -> Result<Tensor<Rational>> {
    let raw = Tensor::from_fn(n, CURVATURE_SLOTS.to_vec(), |_| Jet::constant(n, 0, Rational::integer(rng.gen_range(-3..=3))));
    let skew = raw.alternate(&[0, 1])?;
    let bianchi = skew.sub(&skew.alternate(&[0, 1, 3])?)?;
    Ok(decompose(&bianchi)?.w)
}

/// Checks the algebraic Weyl conditions: skew in the first pair, totally
/// trace-free, first Bianchi identity.
pub fn check_weyl_algebra(a: &Tensor<Rational>) -> Result<()> {
    if a.slots() != CURVATURE_SLOTS {
        return Err(Error::VarianceMismatch("Weyl-type slots expected".into()));
    }
    let checks = [
        ("skew in the first pair", a.add(&a.permute(&[1, 0, 2, 3])?)?),
        ("trace A_ab^c_c", a.contract(2, 3)?),
        ("trace A_cb^c_d", a.contract(2, 0)?),
        ("Bianchi A_[ab^c_d]", a.alternate(&[0, 1, 3])?),
    ];
    for (what, t) in checks {
        if !t.is_zero() {
            return Err(Error::Precondition(format!("prescribed Weyl tensor fails: {what}")));
        }
    }
    Ok(())
}

/// Polynomial connection `Γ^i_{jk} = ⅓ S_{aj}{}^i{}_k x^a` with
/// `S_{ij}{}^k{}_l = A_{ij}{}^k{}_l + A_{il}{}^k{}_j`, whose projective Weyl
/// tensor at the origin is `A`.
pub fn generate_prescribed_weyl(a: &Tensor<Rational>) -> Result<ConnectionSource> {
    check_weyl_algebra(a)?;
    let n = a.dim();
    let third = Rational::new(1, 3);
    let mut gamma = Vec::with_capacity(n * n * n);
    for ix in multi_indices(n, 3) {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let terms: Vec<(Rational, Vec<u8>)> = (0..n)
            .map(|x| {
                let s = a.at(&[x, j, i, k]).add_ref(a.at(&[x, k, i, j]));
                let mut e = vec![0u8; n];
                e[x] = 1;
                (s.mul_ref(&third), e)
            })
            .collect();
        gamma.push(polynomial(&terms));
    }
    Ok(ConnectionSource::Christoffel { n, gamma })
}

/// A named example geometry with its chart.
#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub source: ConnectionSource,
    pub bounds: Vec<(Rational, Rational)>,
    /// `λ` with `P = λg` for Einstein metrics.
    pub einstein_lambda: Option<Rational>,
    /// Evaluate on the float ring by default.
    pub prefers_float: bool,
}

/// `(name, dimension, description)`; dimension 0 means "any n in 2..=6".
pub const BUILTINS: &[(&str, usize, &str)] = &[
    ("flat", 0, "flat R^n, Cartesian coordinates, box [-1,1]^n"),
    ("sphere", 0, "unit round S^n, stereographic g = 4(1+|x|^2)^-2 δ, box [-1,1]^n"),
    ("hyperbolic", 0, "hyperbolic H^n, Poincaré ball g = 4(1-|x|^2)^-2 δ, box [-2/5,2/5]^n"),
    ("s2xs2", 4, "unit S^2 x S^2, two stereographic charts, box [-1,1]^4"),
    ("schwarzschild", 4, "Schwarzschild exterior, M = 1, coordinates (t, r, cos θ, φ), box [0,1]x[3,6]x[-1/2,1/2]x[0,1]"),
    ("prescribed-weyl", 4, "polynomial connection with a seeded generic Weyl tensor at the origin, box [-1,1]^4"),
];

fn conformal_factor(vars: &[usize], sign: i64) -> Expr {
    // 4 / (1 ± Σ x_v²)²
    let sum = vars.iter().fold(Expr::constant(Rational::zero()), |acc, &v| Expr::add(acc, Expr::pow(Expr::Var(v), 2)));
    let base = if sign > 0 {
        Expr::add(Expr::constant(Rational::one()), sum)
    } else {
        Expr::sub(Expr::constant(Rational::one()), sum)
    };
    Expr::div(Expr::constant(Rational::integer(4)), Expr::pow(base, 2))
}

fn q(s: &str) -> Rational {
    s.parse().expect("literal")
}

/// Seed of the `prescribed-weyl` builtin.
pub const PRESCRIBED_WEYL_SEED: u64 = 20_240_611;

pub fn builtin(name: &str, n: Option<usize>) -> Result<Builtin> {
    let &(key, fixed, _) =
        BUILTINS.iter().find(|b| b.0 == name).ok_or_else(|| Error::UnknownBuiltin(name.to_string()))?;
    let n = match (fixed, n) {
        (0, Some(n)) if (2..=6).contains(&n) => n,
        (0, Some(n)) => return Err(Error::Precondition(format!("`{key}` needs 2 <= n <= 6, got {n}"))),
        (0, None) => return Err(Error::Precondition(format!("`{key}` needs a chart dimension"))),
        (f, Some(n)) if n != f => return Err(Error::DimensionMismatch(format!("`{key}` has dimension {f}, not {n}"))),
        (f, _) => f,
    };
    let cube = |h: &str| vec![(q(h).neg_ref(), q(h)); n];
    let all: Vec<usize> = (0..n).collect();
    let b = match key {
        "flat" => Builtin {
            name: key,
            source: ConnectionSource::Metric(MetricSource::diagonal(vec![Expr::constant(Rational::one()); n])?),
            bounds: cube("1"),
            einstein_lambda: Some(Rational::zero()),
            prefers_float: false,
        },
        "sphere" => Builtin {
            name: key,
            source: ConnectionSource::Metric(MetricSource::diagonal(vec![conformal_factor(&all, 1); n])?),
            bounds: cube("1"),
            einstein_lambda: Some(Rational::one()),
            prefers_float: false,
        },
        "hyperbolic" => Builtin {
            name: key,
            source: ConnectionSource::Metric(MetricSource::diagonal(vec![conformal_factor(&all, -1); n])?),
            bounds: cube("2/5"),
            einstein_lambda: Some(Rational::integer(-1)),
            prefers_float: false,
        },
        "s2xs2" => {
            let f1 = conformal_factor(&[0, 1], 1);
            let f2 = conformal_factor(&[2, 3], 1);
            Builtin {
                name: key,
                source: ConnectionSource::Metric(MetricSource::diagonal(vec![f1.clone(), f1, f2.clone(), f2])?),
                bounds: cube("1"),
                einstein_lambda: Some(Rational::new(1, 3)),
                prefers_float: false,
            }
        }
        "schwarzschild" => {
            let g = |s: &str| Expr::parse(s, 4).expect("builtin expression");
            Builtin {
                name: key,
                source: ConnectionSource::Metric(MetricSource::diagonal(vec![
                    g("(2 - x2)/x2"),
                    g("x2/(x2 - 2)"),
                    g("x2^2/(1 - x3^2)"),
                    g("x2^2*(1 - x3^2)"),
                ])?),
                bounds: vec![(q("0"), q("1")), (q("3"), q("6")), (q("-1/2"), q("1/2")), (q("0"), q("1"))],
                einstein_lambda: Some(Rational::zero()),
                prefers_float: true,
            }
        }
        "prescribed-weyl" => {
            let mut rng = ChaCha8Rng::seed_from_u64(PRESCRIBED_WEYL_SEED);
            let a = random_weyl_tensor(4, &mut rng)?;
            Builtin {
                name: key,
                source: generate_prescribed_weyl(&a)?,
                bounds: cube("1"),
                einstein_lambda: None,
                prefers_float: false,
            }
        }
        _ => unreachable!("catalog and match agree"),
    };
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjectiveCurvature;

    #[test]
    fn sample_points_are_seeded_and_inside_the_box() {
        let mut c = ChartSpec::cube(3, q("1/2"));
        c.points.push(vec![q("0"), q("1/4"), q("-1/2")]);
        c.validate().unwrap();
        let a = c.sample_points();
        assert_eq!(a.len(), 1 + DEFAULT_COUNT);
        assert_eq!(a, c.sample_points());
        for p in &a {
            assert!(p.iter().all(|x| *x >= q("-1/2") && *x <= q("1/2")));
        }
        c.points.push(vec![q("1"), q("0"), q("0")]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn flat_connection_jet_is_zero() {
        let b = builtin("flat", Some(3)).unwrap();
        let g = b.source.christoffel_jet(&[q("0"), q("1/3"), q("1")], 4).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn sphere_christoffels_match_hand_formula() {
        // g = e^{2φ}δ with e^{2φ} = 4/(1+|x|²)²: Γ^i_{jk} = δ^i_j φ_k + δ^i_k φ_j − δ_{jk} φ_i,
        // φ_k = −2x_k/(1+|x|²).
        let b = builtin("sphere", Some(2)).unwrap();
        let p = [q("1/2"), q("-1/3")];
        let gamma = b.source.christoffel_jet(&p, 3).unwrap();
        let r2 = q("49/36");
        let phi = |k: usize| p[k].mul_ref(&q("-2")).div_ref(&r2).unwrap();
        for ix in multi_indices(2, 3) {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut want = Rational::zero();
            if i == j {
                want = want.add_ref(&phi(k));
            }
            if i == k {
                want = want.add_ref(&phi(j));
            }
            if j == k {
                want = want.sub_ref(&phi(i));
            }
            assert_eq!(*gamma.at(&[i, j, k]), want, "Γ^{i}_{j}{k}");
        }
    }

    #[test]
    fn toy_metric_levi_civita() {
        // g = diag(1, f(x1)) with f = 1 + x1²: Γ^1_22 = −f'/2, Γ^2_12 = f'/(2f)
        let m = MetricSource::parse(2, &["1".into(), "0".into(), "0".into(), "1 + x1^2".into()]).unwrap();
        let p = [q("2"), q("7")];
        let g = m.levi_civita(&p, 2).unwrap();
        assert_eq!(*g.at(&[0, 1, 1]), q("-2"));
        assert_eq!(*g.at(&[1, 0, 1]), q("2/5"));
        assert_eq!(*g.at(&[1, 1, 0]), q("2/5"));
        assert!(g.at(&[0, 0, 0]).is_zero() && g.at(&[1, 1, 1]).is_zero());
    }

    #[test]
    fn levi_civita_is_metric_compatible() {
        for name in ["sphere", "hyperbolic"] {
            let b = builtin(name, Some(3)).unwrap();
            let m = b.source.metric().unwrap();
            let p = [q("1/4"), q("-1/8"), q("3/16")];
            let gamma = m.levi_civita(&p, 4).unwrap();
            let g = m.metric_jet(&p, 4).unwrap();
            assert!(g.covariant_derivative(&gamma, None).unwrap().is_zero(), "{name}");
        }
    }

    #[test]
    fn round_sphere_ricci_is_n_minus_one_times_g() {
        let b = builtin("sphere", Some(3)).unwrap();
        let p = [q("1/2"), q("0"), q("-1/4")];
        let gamma = b.source.christoffel_jet(&p, 2).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        let g = b.source.metric().unwrap().metric_jet(&p, 1).unwrap();
        assert_eq!(pc.ric, g.scale(&q("2")));
        assert!(pc.w.is_zero());
    }

    #[test]
    fn torsion_is_rejected_and_unknown_names_fail() {
        let mut gamma = vec![Expr::constant(Rational::zero()); 8];
        gamma[1] = Expr::Var(0);
        let src = ConnectionSource::christoffel(2, gamma).unwrap();
        assert!(matches!(src.christoffel_jet(&[q("1"), q("0")], 1), Err(Error::Precondition(_))));
        assert!(matches!(builtin("torus", Some(2)), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn prescribed_weyl_reproduces_a_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_weyl_tensor(4, &mut rng).unwrap();
        assert!(!a.is_zero());
        let src = generate_prescribed_weyl(&a).unwrap();
        let zero = vec![Rational::zero(); 4];
        let pc = ProjectiveCurvature::of_connection(&src.christoffel_jet(&zero, 1).unwrap()).unwrap();
        let a_jet = a.map(|j| Jet::constant(4, 0, j.value().clone()));
        assert_eq!(pc.w, a_jet);
        // symmetric Ricci away from the origin
        let p = vec![q("1/3"), q("-1/2"), q("1/5"), q("2/7")];
        let pc = ProjectiveCurvature::of_connection(&src.christoffel_jet(&p, 2).unwrap()).unwrap();
        assert!(pc.beta.is_zero());
        assert!(generate_prescribed_weyl(&Tensor::zeros(3, CURVATURE_SLOTS.to_vec(), 0)).is_ok());
    }
}
