//! Conformal curvature, the conformal standard tractor bundle of a metric, and
//! its comparison with the projective tractor geometry of the Levi-Civita
//! connection.
//!
//! Densities are trivialized by the metric volume throughout, so every
//! derivative below is the plain Levi-Civita covariant derivative.

use crate::connection::{DensityFrame, MetricSource};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::projective::{riemann, ProjectiveCurvature, CONNECTION_SLOTS};
use crate::scalar::Scalar;
use crate::tensor::{Tensor, Var};
use crate::tractor::{cotractor_derivative, einstein_submetric, TractorContext, TractorKind, TractorSection};

/// Metric, inverse metric and Levi-Civita connection jets at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJets<F: Scalar> {
    pub g: Tensor<F>,
    pub g_inv: Tensor<F>,
    pub gamma: Tensor<F>,
    /// Density trivialization by the metric volume.
    pub frame: DensityFrame<F>,
}

impl<F: Scalar> MetricJets<F> {
    pub fn at(m: &MetricSource, p: &[F], order: usize) -> Result<Self> {
        Ok(MetricJets {
            g: m.metric_jet(p, order)?,
            g_inv: m.inverse_metric_jet(p, order)?,
            gamma: m.levi_civita(p, order)?,
            frame: DensityFrame::of_metric(m, p, order)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    fn nabla(&self, t: &Tensor<F>) -> Result<Tensor<F>> {
        t.clone().with_weight(0).covariant_derivative(&self.gamma, None)
    }
}

/// `R_{abcd} = W̃_{abcd} + 2g_{c[a}P̃_{b]d} + 2g_{d[b}P̃_{a]c}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalCurvature<F: Scalar> {
    /// `R_{abcd} = g_{ce}R_{ab}{}^e{}_d`.
    pub r: Tensor<F>,
    pub ric: Tensor<F>,
    /// Conformal Weyl tensor, all indices down.
    pub w: Tensor<F>,
    /// Conformal Schouten tensor.
    pub p: Tensor<F>,
    /// `J̃ = g^{ab}P̃_{ab}`.
    pub j: Jet<F>,
    g: Tensor<F>,
    g_inv: Tensor<F>,
}

/// `2g_{c[a}P_{b]d} + 2g_{d[b}P_{a]c}` with slots `[a, b, c, d]`.
pub fn kulkarni_nomizu<F: Scalar>(g: &Tensor<F>, p: &Tensor<F>) -> Tensor<F> {
    let n = g.dim();
    Tensor::from_fn(n, vec![Var::Down; 4], |ix| {
        let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = g.get(&[c, a]) * p.get(&[b, d]);
        acc.sub_assign_jet(&(g.get(&[c, b]) * p.get(&[a, d])));
        acc.add_assign_jet(&(g.get(&[d, b]) * p.get(&[a, c])));
        acc.sub_assign_jet(&(g.get(&[d, a]) * p.get(&[b, c])));
        acc
    })
}

pub fn conformal_decompose<F: Scalar>(mj: &MetricJets<F>) -> Result<ConformalCurvature<F>> {
    let n = mj.dim();
    if n < 3 {
        return Err(Error::Precondition(format!("conformal curvature needs n >= 3, got {n}")));
    }
    let r_mixed = riemann(&mj.gamma)?;
    let order = r_mixed.order();
    let g = mj.g.truncate(order);
    let g_inv = mj.g_inv.truncate(order);
    // [a, b, d, c] -> [a, b, c, d]
    let r = r_mixed.contract_with(2, &g, 0)?.permute(&[0, 1, 3, 2])?;
    let ric = r_mixed.contract(2, 0)?;
    let scal = g_inv.contract_many(&ric, &[(0, 0), (1, 1)])?;
    let inv2 = F::one().div_ref(&F::from_i64(2 * (n as i64 - 1)))?;
    let j_ric = scal.get(&[]).scale(&inv2); // J̃ = Sc / (2(n−1))
    let inv = F::one().div_ref(&F::from_i64(n as i64 - 2))?;
    let p = ric.sub(&g.scale_jet(&j_ric))?.scale(&inv);
    let j = g_inv.contract_many(&p, &[(0, 0), (1, 1)])?.get(&[]).clone();
    let w = r.sub(&kulkarni_nomizu(&g, &p))?;
    Ok(ConformalCurvature { r, ric, w, p, j, g, g_inv })
}

impl<F: Scalar> ConformalCurvature<F> {
    /// `R − W̃ − (trace part)`; zero by construction, kept as an oracle.
    pub fn reassembly_residual(&self) -> Result<Tensor<F>> {
        self.r.sub(&self.w.add(&kulkarni_nomizu(&self.g, &self.p))?)
    }

    /// `Ric − (n−2)P̃ − J̃g`.
    pub fn ricci_residual(&self) -> Result<Tensor<F>> {
        let n = self.g.dim() as i64;
        self.ric.sub(&self.p.scale(&F::from_i64(n - 2)))?.sub(&self.g.scale_jet(&self.j))
    }

    /// `g^{ac}W̃_{abcd}`: the conformal Weyl tensor is totally trace-free.
    pub fn weyl_trace(&self) -> Result<Tensor<F>> {
        self.g_inv.contract_many(&self.w, &[(0, 0), (1, 2)])
    }

    /// `W̃_{ab}{}^c{}_d`.
    pub fn weyl_mixed(&self) -> Result<Tensor<F>> {
        // g^{ce} W_{abed}: [c, a, b, d] -> [a, b, c, d]
        self.g_inv.contract_with(1, &self.w, 2)?.permute(&[1, 2, 0, 3])
    }

    /// `|W̃|² = W̃_{abcd}W̃^{abcd}`.
    pub fn weyl_norm_sq(&self) -> Result<Jet<F>> {
        let up = self.weyl_all_up()?;
        Ok(self.w.contract_many(&up, &[(0, 0), (1, 1), (2, 2), (3, 3)])?.get(&[]).clone())
    }

    fn weyl_all_up(&self) -> Result<Tensor<F>> {
        let mut t = self.w.clone();
        for _ in 0..4 {
            // raising slot 0 and rotating it to the back
            t = t.contract_with(0, &self.g_inv, 0)?;
        }
        Ok(t)
    }

    /// `4W̃_{ijkl}W̃^{ijkm} − |W̃|²δ_l^m`, slots `[l, m]`; vanishes in dimension 4.
    pub fn dim4_identity_residual(&self) -> Result<Tensor<F>> {
        let n = self.g.dim();
        let up = self.weyl_all_up()?;
        let x = self.w.contract_many(&up, &[(0, 0), (1, 1), (2, 2)])?.scale(&F::from_i64(4));
        let norm = self.weyl_norm_sq()?;
        let delta = Tensor::<F>::delta(n, x.order());
        let rhs = Tensor::from_data(n, vec![Var::Down, Var::Up], delta.data().to_vec()).scale_jet(&norm);
        x.sub(&rhs)
    }
}

/// `W̃_{ab}{}^c{}_d − W_{ab}{}^c{}_d` (projective Weyl of the Levi-Civita
/// connection); zero for Einstein metrics.
pub fn compare_weyl<F: Scalar>(mj: &MetricJets<F>) -> Result<Tensor<F>> {
    let cc = conformal_decompose(mj)?;
    let pc = ProjectiveCurvature::of_connection(&mj.gamma)?;
    cc.weyl_mixed()?.sub(&pc.w)
}

/// Residuals `P̃ − ½P` and, given `λ`, `P − λg`.
pub fn schouten_halving_check<F: Scalar>(mj: &MetricJets<F>, lambda: Option<&F>) -> Result<(Tensor<F>, Option<Tensor<F>>)> {
    let cc = conformal_decompose(mj)?;
    let pc = ProjectiveCurvature::of_connection(&mj.gamma)?;
    let half = F::one().div_ref(&F::from_i64(2))?;
    let halving = cc.p.sub(&pc.p.scale(&half))?;
    let einstein = match lambda {
        Some(l) => Some(pc.p.sub(&mj.g.truncate(pc.p.order()).scale(l))?),
        None => None,
    };
    Ok((halving, einstein))
}

/// A conformal standard cotractor `(τ | μ_a | σ)` in a metric's splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalTractor<F: Scalar> {
    pub tau: Tensor<F>,
    pub mu: Tensor<F>,
    pub sigma: Tensor<F>,
}

/// `∇̃_a` of a conformal cotractor: components with slots `[a]`, `[a, b]`, `[a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalTractorOneForm<F: Scalar> {
    pub tau: Tensor<F>,
    pub mu: Tensor<F>,
    pub sigma: Tensor<F>,
}

impl<F: Scalar> ConformalTractorOneForm<F> {
    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(ConformalTractorOneForm { tau: self.tau.sub(&o.tau)?, mu: self.mu.sub(&o.mu)?, sigma: self.sigma.sub(&o.sigma)? })
    }

    pub fn is_zero(&self) -> bool {
        self.tau.is_zero() && self.mu.is_zero() && self.sigma.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        self.tau.max_abs().max(self.mu.max_abs()).max(self.sigma.max_abs())
    }
}

impl<F: Scalar> ConformalTractor<F> {
    pub fn new(tau: Tensor<F>, mu: Tensor<F>, sigma: Tensor<F>) -> Result<Self> {
        if tau.rank() != 0 || sigma.rank() != 0 || mu.slots() != [Var::Down] {
            return Err(Error::VarianceMismatch("conformal cotractor components have the wrong shape".into()));
        }
        Ok(ConformalTractor { tau: tau.with_weight(0), mu: mu.with_weight(0), sigma: sigma.with_weight(0) })
    }

    /// Tractor metric `h̃(V, V̄) = g^{ab}μ_aμ̄_b + στ̄ + τσ̄`.
    pub fn pair(&self, o: &Self, g_inv: &Tensor<F>) -> Result<Jet<F>> {
        let mm = g_inv.contract_with(0, &self.mu, 0)?.contract_with(0, &o.mu, 0)?;
        let order = mm.order().min(self.tau.order()).min(o.tau.order());
        let mut acc = mm.get(&[]).truncate(order);
        acc.add_assign_jet(&(self.sigma.get(&[]) * o.tau.get(&[])).truncate(order));
        acc.add_assign_jet(&(self.tau.get(&[]) * o.sigma.get(&[])).truncate(order));
        Ok(acc)
    }
}

/// `∇̃_aV = (∇_aτ − P̃_{ab}g^{bc}μ_c | ∇_aμ_b + g_{ab}τ + P̃_{ab}σ | ∇_aσ − μ_a)`.
pub fn conformal_tractor_derivative<F: Scalar>(
    v: &ConformalTractor<F>,
    mj: &MetricJets<F>,
    cc: &ConformalCurvature<F>,
) -> Result<ConformalTractorOneForm<F>> {
    let order = cc.p.order();
    let g = mj.g.truncate(order);
    let g_inv = mj.g_inv.truncate(order);
    let pmu = cc.p.contract_with(1, &g_inv.contract_with(1, &v.mu, 0)?, 0)?;
    let tau = mj.nabla(&v.tau)?.truncate(order).sub(&pmu.truncate(order))?;
    let mu = mj
        .nabla(&v.mu)?
        .truncate(order)
        .add(&g.scale_jet(v.tau.get(&[])))?
        .add(&cc.p.scale_jet(v.sigma.get(&[])))?;
    let sigma = mj.nabla(&v.sigma)?.truncate(order).sub(&v.mu.truncate(order))?;
    Ok(ConformalTractorOneForm { tau, mu, sigma })
}

/// A conformal standard tractor `(x, y^b, z)`, dual to `(τ | μ_a | σ)` via
/// `V·I = τx + μ_by^b + σz`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalDualTractor<F: Scalar> {
    pub x: Tensor<F>,
    pub y: Tensor<F>,
    pub z: Tensor<F>,
}

impl<F: Scalar> ConformalDualTractor<F> {
    pub fn pair(&self, v: &ConformalTractor<F>) -> Result<Jet<F>> {
        let my = v.mu.contract_with(0, &self.y, 0)?;
        let mut acc = my.get(&[]).clone();
        acc.add_assign_jet(&(v.tau.get(&[]) * self.x.get(&[])));
        acc.add_assign_jet(&(v.sigma.get(&[]) * self.z.get(&[])));
        Ok(acc)
    }
}

/// `I = (1, 0, −J̃/n)`.
pub fn parallel_tractor<F: Scalar>(cc: &ConformalCurvature<F>) -> Result<ConformalDualTractor<F>> {
    let n = cc.g.dim();
    let order = cc.j.order();
    let inv_n = F::one().div_ref(&F::from_i64(n as i64))?;
    Ok(ConformalDualTractor {
        x: Tensor::scalar(Jet::constant(n, order, F::one())),
        y: Tensor::zeros(n, vec![Var::Up], order),
        z: Tensor::scalar(cc.j.scale(&inv_n).neg_jet()),
    })
}

/// Dual connection on tractors:
/// `∇̃_aI = (∇_ax − g_{ab}y^b, ∇_ay^c + P̃_a{}^cx + δ_a^cz, ∇_az − P̃_{ab}y^b)`.
pub fn dual_tractor_derivative<F: Scalar>(
    i: &ConformalDualTractor<F>,
    mj: &MetricJets<F>,
    cc: &ConformalCurvature<F>,
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>)> {
    let n = mj.dim();
    let order = cc.p.order();
    let g = mj.g.truncate(order);
    let g_inv = mj.g_inv.truncate(order);
    let x = mj.nabla(&i.x)?.truncate(order).sub(&g.contract_with(1, &i.y, 0)?.truncate(order))?;
    let p_up = cc.p.contract_with(1, &g_inv, 0)?; // P̃_a^c
    let delta = Tensor::<F>::delta(n, order).permute(&[1, 0])?; // [a, c]
    let y = mj
        .nabla(&i.y)?
        .truncate(order)
        .add(&p_up.scale_jet(i.x.get(&[])))?
        .add(&delta.scale_jet(i.z.get(&[])))?;
    let z = mj.nabla(&i.z)?.truncate(order).sub(&cc.p.contract_with(1, &i.y, 0)?.truncate(order))?;
    Ok((x, y, z))
}

/// `ι(μ | σ) = (J̃σ/n | μ | σ)`.
pub fn iota<F: Scalar>(u: &TractorSection<F>, cc: &ConformalCurvature<F>) -> Result<ConformalTractor<F>> {
    if u.kind != TractorKind::Cotractor {
        return Err(Error::VarianceMismatch("ι acts on projective cotractors".into()));
    }
    let n = cc.g.dim();
    let inv_n = F::one().div_ref(&F::from_i64(n as i64))?;
    let tau = Tensor::scalar(cc.j.scale(&inv_n).mul_jet(u.bottom.get(&[])));
    ConformalTractor::new(tau, u.top.clone(), u.bottom.clone())
}

/// Residuals of the three inclusion properties at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct IotaReport<F: Scalar> {
    /// `(ιU)·I` for each test cotractor.
    pub annihilation: Vec<Jet<F>>,
    /// `∇̃(ιU) − ι(∇U)`.
    pub connection: Vec<ConformalTractorOneForm<F>>,
    /// `h̃(ιU, ιŪ) − h(U, Ū)` with `h = (g^{ab}, 0, λ)`, `λ = 2J̃/n`.
    pub metric: Vec<Jet<F>>,
    /// `λ − 2J̃/n` for the supplied Einstein constant.
    pub lambda_residual: Jet<F>,
}

impl<F: Scalar> IotaReport<F> {
    pub fn is_zero(&self) -> bool {
        self.annihilation.iter().all(Jet::is_zero)
            && self.connection.iter().all(ConformalTractorOneForm::is_zero)
            && self.metric.iter().all(Jet::is_zero)
            && self.lambda_residual.is_zero()
    }

    pub fn max_abs(&self) -> f64 {
        let a = self.annihilation.iter().chain(&self.metric).map(Jet::max_abs).fold(0.0, f64::max);
        let c = self.connection.iter().map(ConformalTractorOneForm::max_abs).fold(0.0, f64::max);
        a.max(c).max(self.lambda_residual.max_abs())
    }
}

/// Runs the three inclusion checks on the given projective cotractors
/// (jets of order ≥ 1) for an Einstein metric with `P = λg`.
pub fn iota_checks<F: Scalar>(mj: &MetricJets<F>, lambda: &F, cotractors: &[TractorSection<F>]) -> Result<IotaReport<F>> {
    let n = mj.dim();
    let cc = conformal_decompose(mj)?;
    let two_j_n = cc.j.scale(&F::from_i64(2).div_ref(&F::from_i64(n as i64))?);
    let lambda_residual = Jet::constant(n, two_j_n.order(), lambda.clone()).sub_jet(&two_j_n);
    let ctx = TractorContext::new(&mj.gamma, &mj.frame)?;
    let i = parallel_tractor(&cc)?;
    let h = einstein_submetric(&mj.g_inv, lambda)?;
    let mut report = IotaReport { annihilation: Vec::new(), connection: Vec::new(), metric: Vec::new(), lambda_residual };
    for u in cotractors {
        let iu = iota(u, &cc)?;
        report.annihilation.push(i.pair(&iu)?);
        let lhs = conformal_tractor_derivative(&iu, mj, &cc)?;
        let du = cotractor_derivative(u, &ctx)?;
        let order = lhs.mu.order();
        let bottom = du.bottom.with_weight(0).truncate(order);
        let rhs = ConformalTractorOneForm {
            tau: bottom.scale_jet(&cc.j.truncate(order).scale(&F::one().div_ref(&F::from_i64(n as i64))?)),
            mu: du.top.with_weight(0).truncate(order),
            sigma: bottom,
        };
        report.connection.push(lhs.sub(&rhs)?);
        for ub in cotractors {
            let iub = iota(ub, &cc)?;
            let lhs = iu.pair(&iub, &mj.g_inv)?;
            let rhs = h.pair(u, ub)?.truncate(lhs.order());
            report.metric.push(lhs.sub_jet(&rhs));
        }
    }
    Ok(report)
}

/// `Γ^c_{ab} + Υ_aδ^c_b + Υ_bδ^c_a − g_{ab}Υ^c` with `Υ = dΩ/Ω`: the
/// Levi-Civita connection of `Ω²g` predicted from that of `g`.
pub fn conformal_connection_change<F: Scalar>(mj: &MetricJets<F>, upsilon: &Tensor<F>) -> Result<Tensor<F>> {
    let n = mj.dim();
    let order = mj.gamma.order().min(upsilon.order());
    let u_up = mj.g_inv.contract_with(1, upsilon, 0)?;
    Ok(Tensor::from_fn(n, CONNECTION_SLOTS.to_vec(), |ix| {
        let (c, a, b) = (ix[0], ix[1], ix[2]);
        let mut acc = mj.gamma.get(ix).truncate(order);
        if c == b {
            acc.add_assign_jet(&upsilon.get(&[a]).truncate(order));
        }
        if c == a {
            acc.add_assign_jet(&upsilon.get(&[b]).truncate(order));
        }
        acc.sub_assign_jet(&(mj.g.get(&[a, b]) * u_up.get(&[c])).truncate(order));
        acc
    }))
}

/// A projective cotractor with the given jets, weight 1.
pub fn projective_cotractor<F: Scalar>(mu: Tensor<F>, sigma: Jet<F>) -> Result<TractorSection<F>> {
    TractorSection::new(TractorKind::Cotractor, mu, Tensor::scalar(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::builtin;
    use crate::scalar::Rational;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn flat_is_conformally_flat() {
        let m = builtin("flat", Some(3)).unwrap().source.metric().unwrap().clone();
        let mj = MetricJets::at(&m, &[q("1/2"), q("0"), q("1")], 2).unwrap();
        let cc = conformal_decompose(&mj).unwrap();
        assert!(cc.w.is_zero() && cc.p.is_zero() && cc.j.is_zero());
    }

    #[test]
    fn unit_four_sphere_schouten() {
        let b = builtin("sphere", Some(4)).unwrap();
        let m = b.source.metric().unwrap();
        let p = [q("1/3"), q("-1/2"), q("1/5"), q("0")];
        let mj = MetricJets::at(m, &p, 2).unwrap();
        let cc = conformal_decompose(&mj).unwrap();
        assert!(cc.w.is_zero());
        assert!(cc.p.sub(&mj.g.truncate(1).scale(&q("1/2"))).unwrap().is_zero());
        assert!(cc.reassembly_residual().unwrap().is_zero());
        assert!(cc.ricci_residual().unwrap().is_zero());
        let (half, ein) = schouten_halving_check(&mj, Some(&Rational::one())).unwrap();
        assert!(half.is_zero() && ein.unwrap().is_zero());
        let i = parallel_tractor(&cc).unwrap();
        let (x, y, z) = dual_tractor_derivative(&i, &mj, &cc).unwrap();
        assert!(x.is_zero() && y.is_zero() && z.is_zero());
    }

    #[test]
    fn s2xs2_weyl_is_trace_free_and_nonzero() {
        let m = builtin("s2xs2", None).unwrap().source.metric().unwrap().clone();
        let mj = MetricJets::at(&m, &[q("1/2"), q("1/4"), q("-1/3"), q("0")], 1).unwrap();
        let cc = conformal_decompose(&mj).unwrap();
        assert!(!cc.w.is_zero());
        assert!(cc.weyl_trace().unwrap().is_zero());
        assert!(cc.dim4_identity_residual().unwrap().is_zero());
        assert!(compare_weyl(&mj).unwrap().is_zero());
    }
}
