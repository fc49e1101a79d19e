//! Projective tractor calculus in a chosen splitting.
//!
//! A cotractor is a pair `(μ_b | σ)` of weight-1 fields, a tractor a pair
//! `(ν^b, ρ)` of weight −1 fields. The splitting is the one determined by
//! the connection the components are expressed against; changing the
//! connection by `Υ` changes the components by the explicit formulas below.
//! Tractor endomorphisms are `(n+1) × (n+1)` matrices in the ordered basis
//! `(Y_1, …, Y_n, X)`, so `X = (0, …, 0, 1)`.

use crate::connection::DensityFrame;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{EndomorphismDensity, JetMatrix};
use crate::projective::ProjectiveCurvature;
use crate::scalar::Scalar;
use crate::tensor::{Tensor, Var};

/// Connection data shared by all tractor derivatives at one point.
#[derive(Clone, Debug)]
pub struct TractorContext<F: Scalar> {
    pub gamma: Tensor<F>,
    pub theta: Tensor<F>,
    pub p: Tensor<F>,
}

impl<F: Scalar> TractorContext<F> {
    pub fn new(gamma: &Tensor<F>, frame: &DensityFrame<F>) -> Result<Self> {
        let p = ProjectiveCurvature::of_connection(gamma)?.p;
        Ok(TractorContext { gamma: gamma.clone(), theta: frame.theta(gamma)?, p })
    }

    fn nabla(&self, t: &Tensor<F>) -> Result<Tensor<F>> {
        t.covariant_derivative(&self.gamma, Some(&self.theta))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TractorKind {
    /// `(μ_b | σ)`, weight 1.
    Cotractor,
    /// `(ν^b, ρ)`, weight −1.
    Tractor,
}

impl TractorKind {
    fn weight(self) -> i32 {
        match self {
            TractorKind::Cotractor => 1,
            TractorKind::Tractor => -1,
        }
    }

    fn var(self) -> Var {
        match self {
            TractorKind::Cotractor => Var::Down,
            TractorKind::Tractor => Var::Up,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TractorSection<F: Scalar> {
    pub kind: TractorKind,
    /// `μ_b` or `ν^b`.
    pub top: Tensor<F>,
    /// `σ` or `ρ`.
    pub bottom: Tensor<F>,
}

impl<F: Scalar> TractorSection<F> {
    pub fn new(kind: TractorKind, top: Tensor<F>, bottom: Tensor<F>) -> Result<Self> {
        if top.slots() != [kind.var()] || bottom.rank() != 0 {
            return Err(Error::VarianceMismatch(format!("{kind:?} components have the wrong shape")));
        }
        let w = kind.weight();
        Ok(TractorSection { kind, top: top.with_weight(w), bottom: bottom.with_weight(w) })
    }

    /// Components in the splitting of the connection shifted by `Υ`:
    /// `(μ + Υσ | σ)` resp. `(ν, ρ − Υ_bν^b)`.
    pub fn change_splitting(&self, upsilon: &Tensor<F>) -> Result<Self> {
        let w = self.kind.weight();
        Ok(match self.kind {
            TractorKind::Cotractor => TractorSection {
                kind: self.kind,
                top: self.top.add(&upsilon.scale_jet(self.bottom.get(&[])))?.with_weight(w),
                bottom: self.bottom.clone(),
            },
            TractorKind::Tractor => TractorSection {
                kind: self.kind,
                top: self.top.clone(),
                bottom: self.bottom.sub(&upsilon.contract_with(0, &self.top, 0)?)?.with_weight(w),
            },
        })
    }

    /// The `n + 1` components as jets, `top` first.
    pub fn column(&self) -> Vec<Jet<F>> {
        let mut c = self.top.data().to_vec();
        c.push(self.bottom.get(&[]).clone());
        c
    }
}

/// A tractor-valued 1-form: `top` has slots `[Down a, ±b]`, `bottom` `[Down a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TractorOneForm<F: Scalar> {
    pub kind: TractorKind,
    pub top: Tensor<F>,
    pub bottom: Tensor<F>,
}

impl<F: Scalar> TractorOneForm<F> {
    /// Component change under a new splitting, acting on the tractor slot.
    pub fn change_splitting(&self, upsilon: &Tensor<F>) -> Result<Self> {
        Ok(match self.kind {
            // (A_ab + B_a Υ_b | B_a)
            TractorKind::Cotractor => TractorOneForm {
                kind: self.kind,
                top: self.top.add(&self.bottom.product(upsilon)?)?,
                bottom: self.bottom.clone(),
            },
            // (A_a^b, B_a − Υ_b A_a^b)
            TractorKind::Tractor => TractorOneForm {
                kind: self.kind,
                top: self.top.clone(),
                bottom: self.bottom.sub(&self.top.contract_with(1, upsilon, 0)?)?,
            },
        })
    }

    pub fn is_zero(&self) -> bool {
        self.top.is_zero() && self.bottom.is_zero()
    }
}

/// `∇_a(μ_b | σ) = (∇_aμ_b + P_{ab}σ | ∇_aσ − μ_a)`.
pub fn cotractor_derivative<F: Scalar>(s: &TractorSection<F>, ctx: &TractorContext<F>) -> Result<TractorOneForm<F>> {
    if s.kind != TractorKind::Cotractor {
        return Err(Error::VarianceMismatch("expected a cotractor".into()));
    }
    let top = ctx.nabla(&s.top)?.add(&ctx.p.scale_jet(s.bottom.get(&[])))?;
    let bottom = ctx.nabla(&s.bottom)?.sub(&s.top)?;
    Ok(TractorOneForm { kind: s.kind, top: top.with_weight(0), bottom: bottom.with_weight(0) })
}

/// `∇_a(ν^b, ρ) = (∇_aν^b + ρδ^b_a, ∇_aρ − P_{ab}ν^b)`.
pub fn tractor_derivative<F: Scalar>(s: &TractorSection<F>, ctx: &TractorContext<F>) -> Result<TractorOneForm<F>> {
    if s.kind != TractorKind::Tractor {
        return Err(Error::VarianceMismatch("expected a tractor".into()));
    }
    let n = s.top.dim();
    let order = ctx.gamma.order();
    // δ has slots [Up, Down]; we need [Down a, Up b]
    let delta = Tensor::<F>::delta(n, order).permute(&[1, 0])?;
    let top = ctx.nabla(&s.top)?.add(&delta.scale_jet(s.bottom.get(&[])))?;
    let bottom = ctx.nabla(&s.bottom)?.sub(&ctx.p.contract_with(1, &s.top, 0)?)?;
    Ok(TractorOneForm { kind: s.kind, top: top.with_weight(0), bottom: bottom.with_weight(0) })
}

/// `(∇_a∇_b − ∇_b∇_a)` applied to a tractor: top slots `[a, b, c]`,
/// bottom `[a, b]`.
pub fn tractor_commutator<F: Scalar>(s: &TractorSection<F>, ctx: &TractorContext<F>) -> Result<(Tensor<F>, Tensor<F>)> {
    let d = tractor_derivative(s, ctx)?;
    let n = s.top.dim();
    let w = s.kind.weight();
    let a = d.top.with_weight(w); // [b, c]
    let b = d.bottom.with_weight(w); // [b]
    let order = ctx.gamma.order();
    // ∇_e A_b^c + B_b δ^c_e ;  ∇_e B_b − P_ec A_b^c
    let delta = Tensor::<F>::delta(n, order); // [c, e]
    let aa = ctx.nabla(&a)?.add(&b.product(&delta)?.permute(&[2, 0, 1])?)?;
    let pa = ctx.p.contract_with(1, &a, 1)?; // [e, b]
    let bb = ctx.nabla(&b)?.sub(&pa)?;
    let top = aa.sub(&aa.permute(&[1, 0, 2])?)?;
    let bottom = bb.sub(&bb.permute(&[1, 0])?)?;
    Ok((top.with_weight(0), bottom.with_weight(0)))
}

/// Tractor curvature `Ω_{ab}{}^C{}_D` as `(n+1) × (n+1)` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct TractorCurvature<F: Scalar> {
    n: usize,
    blocks: Vec<JetMatrix<F>>,
}

/// `Ω_{ab} = [[W_{ab}{}^c{}_d, 0], [−C_{dab}, 0]]`.
pub fn tractor_curvature<F: Scalar>(w: &Tensor<F>, c: &Tensor<F>) -> Result<TractorCurvature<F>> {
    let n = w.dim();
    if c.dim() != n {
        return Err(Error::DimensionMismatch("W and C dimensions differ".into()));
    }
    let order = w.order().min(c.order());
    let mut blocks = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut m = vec![vec![Jet::zero(n, order); n + 1]; n + 1];
            for (row_c, row) in m.iter_mut().enumerate().take(n) {
                for (d, e) in row.iter_mut().enumerate().take(n) {
                    *e = w.get(&[a, b, row_c, d]).truncate(order);
                }
            }
            for d in 0..n {
                m[n][d] = c.get(&[d, a, b]).truncate(order).neg_jet();
            }
            blocks.push(m);
        }
    }
    Ok(TractorCurvature { n, blocks })
}

impl<F: Scalar> TractorCurvature<F> {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> &JetMatrix<F> {
        &self.blocks[a * self.n + b]
    }

    /// `Ω_{ab}{}^C{}_D X^D`, which vanishes identically.
    pub fn annihilates_x(&self) -> bool {
        self.blocks.iter().all(|m| m.iter().all(|row| row[self.n].is_zero()))
    }

    /// `Ω_{ab}` applied to a tractor: top `[a, b, c]`, bottom `[a, b]`.
    pub fn apply(&self, s: &TractorSection<F>) -> Result<(Tensor<F>, Tensor<F>)> {
        if s.kind != TractorKind::Tractor {
            return Err(Error::VarianceMismatch("Ω acts on tractors".into()));
        }
        let n = self.n;
        let col = s.column();
        let order = col.iter().map(Jet::order).min().unwrap_or(0).min(self.blocks[0][0][0].order());
        let entry = |a: usize, b: usize, row: usize| {
            let mut acc = Jet::zero(n, order);
            for (d, v) in col.iter().enumerate() {
                acc.mul_acc(&self.blocks[a * n + b][row][d], v);
            }
            acc
        };
        let top = Tensor::from_fn(n, vec![Var::Down, Var::Down, Var::Up], |ix| entry(ix[0], ix[1], ix[2]));
        let bottom = Tensor::from_fn(n, vec![Var::Down, Var::Down], |ix| entry(ix[0], ix[1], n));
        Ok((top, bottom))
    }

    /// `Ω_{abCD} + Ω_{abDC}` after lowering with `h_{AB}`, the inverse of the
    /// `(n+1) × (n+1)` matrix `h^{AB}`; zero when `h` is parallel.
    pub fn skewness_residual(&self, h_upper: &JetMatrix<F>) -> Result<Vec<JetMatrix<F>>> {
        let (det, adj) = EndomorphismDensity::new(h_upper.clone(), 0)?.det_adj()?;
        let inv = det.recip().map_err(|_| Error::Singular("tractor form is degenerate".into()))?;
        let lower: JetMatrix<F> = adj.m.iter().map(|r| r.iter().map(|x| x.mul_jet(&inv)).collect()).collect();
        let mut out = Vec::with_capacity(self.blocks.len());
        for m in &self.blocks {
            let l = crate::linalg::matmul(&lower, m);
            let res: JetMatrix<F> =
                (0..=self.n).map(|c| (0..=self.n).map(|d| &l[c][d] + &l[d][c]).collect()).collect();
            out.push(res);
        }
        Ok(out)
    }
}

/// A symmetric form `h^{AB}` on cotractors in blocks `(g^{ab}, v^a, τ)`:
/// `h(U, Ū) = g^{ab}μ_aμ̄_b + v^a(μ_aσ̄ + σμ̄_a) + τσσ̄`. All blocks have weight −2.
#[derive(Clone, Debug, PartialEq)]
pub struct SubMetric<F: Scalar> {
    pub g: Tensor<F>,
    pub v: Tensor<F>,
    pub tau: Tensor<F>,
}

impl<F: Scalar> SubMetric<F> {
    pub fn new(g: Tensor<F>, v: Tensor<F>, tau: Tensor<F>) -> Result<Self> {
        if g.slots() != [Var::Up, Var::Up] || v.slots() != [Var::Up] || tau.rank() != 0 {
            return Err(Error::VarianceMismatch("sub-metric blocks have the wrong shape".into()));
        }
        Ok(SubMetric { g: g.with_weight(-2), v: v.with_weight(-2), tau: tau.with_weight(-2) })
    }

    pub fn is_diagonal(&self) -> bool {
        self.v.is_zero()
    }

    /// `h(U, Ū)` for two cotractors.
    pub fn pair(&self, u: &TractorSection<F>, ub: &TractorSection<F>) -> Result<Jet<F>> {
        let (m, s) = (&u.top, u.bottom.get(&[]));
        let (mb, sb) = (&ub.top, ub.bottom.get(&[]));
        let gmm = self.g.contract_with(0, m, 0)?.contract_with(0, mb, 0)?;
        let vm = self.v.contract_with(0, m, 0)?;
        let vmb = self.v.contract_with(0, mb, 0)?;
        let mut acc = gmm.get(&[]).clone();
        acc.add_assign_jet(&vm.get(&[]).mul_jet(sb));
        acc.add_assign_jet(&vmb.get(&[]).mul_jet(s));
        acc.add_assign_jet(&self.tau.get(&[]).mul_jet(&s.mul_jet(sb)));
        Ok(acc)
    }

    /// `(n+1) × (n+1)` matrix of `h^{AB}`.
    pub fn matrix(&self) -> JetMatrix<F> {
        let n = self.g.dim();
        let mut m: JetMatrix<F> = (0..n)
            .map(|i| {
                let mut row: Vec<Jet<F>> = (0..n).map(|j| self.g.get(&[i, j]).clone()).collect();
                row.push(self.v.get(&[i]).clone());
                row
            })
            .collect();
        let mut last: Vec<Jet<F>> = (0..n).map(|j| self.v.get(&[j]).clone()).collect();
        last.push(self.tau.get(&[]).clone());
        m.push(last);
        m
    }

    /// Blocks in the splitting shifted by `Υ`:
    /// `(g, v − gΥ, τ − 2vΥ + gΥΥ)`.
    pub fn change_splitting(&self, upsilon: &Tensor<F>) -> Result<Self> {
        let gu = self.g.contract_with(1, upsilon, 0)?; // g^{ab}Υ_b
        let vu = self.v.contract_with(0, upsilon, 0)?;
        let guu = gu.contract_with(0, upsilon, 0)?;
        let v = self.v.sub(&gu)?;
        let tau = self.tau.sub(&vu.scale(&F::from_i64(2)))?.add(&guu)?;
        SubMetric::new(self.g.clone(), v, tau)
    }
}

/// `h` with blocks `(g^{ab}, 0, λ)` for an Einstein metric with `P = λg`.
pub fn einstein_submetric<F: Scalar>(g_inv: &Tensor<F>, lambda: &F) -> Result<SubMetric<F>> {
    let n = g_inv.dim();
    let order = g_inv.order();
    SubMetric::new(
        g_inv.clone(),
        Tensor::zeros(n, vec![Var::Up], order),
        Tensor::scalar(Jet::constant(n, order, lambda.clone())),
    )
}

/// `∇_a h^{AB}` in blocks for a general `h`:
/// `(∇g^{bc} + δ^b_a v^c + v^bδ^c_a, ∇v^b + τδ^b_a − g^{bc}P_{ac}, ∇τ − 2P_{ab}v^b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubMetricDerivative<F: Scalar> {
    pub dg: Tensor<F>,
    pub dv: Tensor<F>,
    pub dtau: Tensor<F>,
}

impl<F: Scalar> SubMetricDerivative<F> {
    pub fn is_zero(&self) -> bool {
        self.dg.is_zero() && self.dv.is_zero() && self.dtau.is_zero()
    }

    pub fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.dg.negligible(scale, tol) && self.dv.negligible(scale, tol) && self.dtau.negligible(scale, tol)
    }
}

pub fn submetric_derivative_full<F: Scalar>(h: &SubMetric<F>, ctx: &TractorContext<F>) -> Result<SubMetricDerivative<F>> {
    let n = h.g.dim();
    let order = ctx.gamma.order();
    let delta = Tensor::<F>::delta(n, order).permute(&[1, 0])?; // [a, b]
    let dv_g = delta.product(&h.v)?; // δ^b_a v^c : [a, b, c]
    let dg = ctx.nabla(&h.g)?.add(&dv_g)?.add(&dv_g.permute(&[0, 2, 1])?)?;
    let gp = ctx.p.contract_with(1, &h.g, 1)?; // P_ac g^{bc} : [a, b]
    let dv = ctx.nabla(&h.v)?.add(&delta.scale_jet(h.tau.get(&[])))?.sub(&gp)?;
    let pv = ctx.p.contract_with(1, &h.v, 0)?.scale(&F::from_i64(2));
    let dtau = ctx.nabla(&h.tau)?.sub(&pv)?;
    Ok(SubMetricDerivative { dg: dg.with_weight(0), dv: dv.with_weight(0), dtau: dtau.with_weight(0) })
}

/// The block formula for a diagonal `h`: `(∇g^{bc}, τδ_a^c − g^{bc}P_{ab}, ∇τ)`.
pub fn submetric_derivative<F: Scalar>(h: &SubMetric<F>, ctx: &TractorContext<F>) -> Result<SubMetricDerivative<F>> {
    if !h.is_diagonal() {
        return Err(Error::Precondition("sub-metric is not diagonal in this splitting".into()));
    }
    submetric_derivative_full(h, ctx)
}

/// The unique `Υ_b = g_{ba}v^a` whose splitting change makes `h` diagonal.
pub fn diagonalizing_shift<F: Scalar>(h: &SubMetric<F>) -> Result<Tensor<F>> {
    let n = h.g.dim();
    let m: JetMatrix<F> = (0..n).map(|i| (0..n).map(|j| h.g.get(&[i, j]).clone()).collect()).collect();
    let (det, adj) = EndomorphismDensity::new(m, 0)?.det_adj()?;
    let inv = det.recip().map_err(|_| Error::Singular("sub-metric block g is degenerate".into()))?;
    let g_lower = Tensor::from_fn(n, vec![Var::Down, Var::Down], |ix| adj.m[ix[0]][ix[1]].mul_jet(&inv))
        .with_weight(2);
    g_lower.contract_with(1, &h.v, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{builtin, random_one_form, random_polynomial_connection};
    use crate::projective::{cotton, projective_shift, CONNECTION_SLOTS};
    use crate::scalar::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type T = Tensor<Rational>;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn random_section(kind: TractorKind, n: usize, order: usize, seed: u64) -> TractorSection<Rational> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<Rational> = (0..n).map(|i| Rational::new(i as i64 + 1, 5)).collect();
        let f = random_one_form(n, 2, &mut rng);
        let top = f.jet(&p, order).unwrap();
        let top = if kind == TractorKind::Tractor { T::from_data(n, vec![Var::Up], top.data().to_vec()) } else { top };
        let s = crate::connection::random_polynomial(n, 2, &mut rng).eval(&p, order).unwrap();
        TractorSection::new(kind, top, T::scalar(s)).unwrap()
    }

    #[test]
    fn constant_scale_on_flat_space_is_parallel() {
        let n = 3;
        let g = T::zeros(n, CONNECTION_SLOTS.to_vec(), 3);
        let ctx = TractorContext::new(&g, &DensityFrame::Coordinate).unwrap();
        let s = TractorSection::new(
            TractorKind::Cotractor,
            T::zeros(n, vec![Var::Down], 3),
            T::scalar(Jet::constant(n, 3, Rational::one())),
        )
        .unwrap();
        assert!(cotractor_derivative(&s, &ctx).unwrap().is_zero());
    }

    #[test]
    fn derivatives_are_splitting_independent() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p: Vec<Rational> = vec![q("1/3"), q("-1/2"), q("1/4")];
        let gamma = random_polynomial_connection(n, 2, &mut rng).christoffel_jet(&p, 3).unwrap();
        let ups = random_one_form(n, 2, &mut rng).jet(&p, 3).unwrap();
        let gamma_hat = projective_shift(&gamma, &ups).unwrap();
        let ctx = TractorContext::new(&gamma, &DensityFrame::Coordinate).unwrap();
        let ctx_hat = TractorContext::new(&gamma_hat, &DensityFrame::Coordinate).unwrap();
        for kind in [TractorKind::Cotractor, TractorKind::Tractor] {
            let s = random_section(kind, n, 3, 5);
            let s_hat = s.change_splitting(&ups).unwrap();
            let (d, d_hat) = match kind {
                TractorKind::Cotractor => {
                    (cotractor_derivative(&s, &ctx).unwrap(), cotractor_derivative(&s_hat, &ctx_hat).unwrap())
                }
                TractorKind::Tractor => {
                    (tractor_derivative(&s, &ctx).unwrap(), tractor_derivative(&s_hat, &ctx_hat).unwrap())
                }
            };
            let moved = d.change_splitting(&ups.truncate(d.top.order())).unwrap();
            assert_eq!(moved.top.truncate(1), d_hat.top.truncate(1), "{kind:?} top");
            assert_eq!(moved.bottom.truncate(1), d_hat.bottom.truncate(1), "{kind:?} bottom");
        }
    }

    #[test]
    fn commutator_is_tractor_curvature() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p: Vec<Rational> = vec![q("1/3"), q("1/2"), q("-1/4")];
        let gamma = random_polynomial_connection(n, 2, &mut rng).christoffel_jet(&p, 3).unwrap();
        let ctx = TractorContext::new(&gamma, &DensityFrame::Coordinate).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        let c = cotton(&gamma, &pc.p).unwrap();
        let omega = tractor_curvature(&pc.w, &c).unwrap();
        assert!(omega.annihilates_x());
        let s = random_section(TractorKind::Tractor, n, 3, 9);
        let (top, bottom) = tractor_commutator(&s, &ctx).unwrap();
        let (wt, wb) = omega.apply(&s).unwrap();
        assert_eq!(top.truncate(0), wt.truncate(0).with_weight(0));
        assert_eq!(bottom.truncate(0), wb.truncate(0).with_weight(0));
    }

    #[test]
    fn submetric_derivative_matches_pairing_oracle() {
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p: Vec<Rational> = vec![q("1/3"), q("1/2"), q("-1/4")];
        let gamma = random_polynomial_connection(n, 1, &mut rng).christoffel_jet(&p, 3).unwrap();
        let ctx = TractorContext::new(&gamma, &DensityFrame::Coordinate).unwrap();
        let sym = |rng: &mut ChaCha8Rng| {
            let f = random_one_form(n, 2, rng).jet(&p, 3).unwrap();
            T::from_fn(n, vec![Var::Up, Var::Up], |ix| f.get(&[ix[0]]) * f.get(&[ix[1]]))
        };
        let g = sym(&mut rng).add(&sym(&mut rng)).unwrap();
        let v = T::from_data(n, vec![Var::Up], random_one_form(n, 2, &mut rng).jet(&p, 3).unwrap().data().to_vec());
        let tau = T::scalar(crate::connection::random_polynomial(n, 2, &mut rng).eval(&p, 3).unwrap());
        let h = SubMetric::new(g, v, tau).unwrap();
        let dh = submetric_derivative_full(&h, &ctx).unwrap();
        let u = random_section(TractorKind::Cotractor, n, 3, 21);
        let ub = random_section(TractorKind::Cotractor, n, 3, 22);
        let du = cotractor_derivative(&u, &ctx).unwrap();
        let dub = cotractor_derivative(&ub, &ctx).unwrap();
        let pairing = T::scalar(h.pair(&u, &ub).unwrap()).partial().unwrap();
        for a in 0..n {
            // (∇_a h)(U, Ū) = ∂_a h(U,Ū) − h(∇_aU, Ū) − h(U, ∇_aŪ)
            let row = |f: &TractorOneForm<Rational>| {
                TractorSection::new(
                    TractorKind::Cotractor,
                    T::from_fn(n, vec![Var::Down], |ix| f.top.get(&[a, ix[0]]).clone()),
                    T::scalar(f.bottom.get(&[a]).clone()),
                )
                .unwrap()
            };
            let mut want = pairing.get(&[a]).clone();
            want.sub_assign_jet(&h.pair(&row(&du), &ub).unwrap());
            want.sub_assign_jet(&h.pair(&u, &row(&dub)).unwrap());
            let slice = SubMetric {
                g: T::from_fn(n, vec![Var::Up, Var::Up], |ix| dh.dg.get(&[a, ix[0], ix[1]]).clone()),
                v: T::from_fn(n, vec![Var::Up], |ix| dh.dv.get(&[a, ix[0]]).clone()),
                tau: T::scalar(dh.dtau.get(&[a]).clone()),
            };
            let got = slice.pair(&u, &ub).unwrap();
            assert_eq!(got.truncate(1), want.truncate(1));
        }
    }

    #[test]
    fn diagonalizing_shift_round_trip() {
        let n = 2;
        let b = builtin("sphere", Some(n)).unwrap();
        let m = b.source.metric().unwrap();
        let p = [q("1/2"), q("1/3")];
        let gi = m.inverse_metric_jet(&p, 2).unwrap();
        let h = einstein_submetric(&gi, &Rational::one()).unwrap();
        assert!(diagonalizing_shift(&h).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ups = random_one_form(n, 2, &mut rng).jet(&p, 2).unwrap();
        let moved = h.change_splitting(&ups).unwrap();
        let back = diagonalizing_shift(&moved).unwrap();
        assert_eq!(back, ups.neg());
        let diag = moved.change_splitting(&back).unwrap();
        assert!(diag.is_diagonal());
        assert_eq!(diag, h);
    }
}
