//! Curvature of a torsion-free connection and its projective decomposition.
//!
//! Conventions: `Γ` has slots `[Up c, Down a, Down b]` (`Γ^c_{ab}`); the
//! curvature `R_{ab}{}^c{}_d` has slots `[Down a, Down b, Up c, Down d]` and
//! satisfies `(∇_a∇_b − ∇_b∇_a)v^c = R_{ab}{}^c{}_d v^d`, i.e.
//! `R_{ab}{}^c{}_d = ∂_aΓ^c_{bd} − ∂_bΓ^c_{ad} + Γ^c_{ae}Γ^e_{bd} − Γ^c_{be}Γ^e_{ad}`.
//! The Cotton tensor `C_{dab}` has slots `[d, a, b]`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::{coordinate_density_form, Tensor, Var};

pub const CONNECTION_SLOTS: [Var; 3] = [Var::Up, Var::Down, Var::Down];
pub const CURVATURE_SLOTS: [Var; 4] = [Var::Down, Var::Down, Var::Up, Var::Down];

fn check_connection<F: Scalar>(gamma: &Tensor<F>) -> Result<()> {
    if gamma.slots() != CONNECTION_SLOTS {
        return Err(Error::VarianceMismatch(format!("connection slots {:?}", gamma.slots())));
    }
    Ok(())
}

fn check_curvature<F: Scalar>(r: &Tensor<F>) -> Result<()> {
    if r.slots() != CURVATURE_SLOTS {
        return Err(Error::VarianceMismatch(format!("curvature slots {:?}", r.slots())));
    }
    Ok(())
}

fn need_order<F: Scalar>(t: &Tensor<F>, need: usize) -> Result<()> {
    let have = t.order();
    if have < need {
        return Err(Error::InsufficientOrder { need, have });
    }
    Ok(())
}

fn inv<F: Scalar>(k: i64) -> F {
    F::one().div_ref(&F::from_i64(k)).expect("nonzero integer")
}

/// True when `Γ^i_{jk} = Γ^i_{kj}` to all available orders.
pub fn is_torsion_free<F: Scalar>(gamma: &Tensor<F>) -> bool {
    let n = gamma.dim();
    (0..n).all(|i| (0..n).all(|j| (0..j).all(|k| gamma.get(&[i, j, k]) == gamma.get(&[i, k, j]))))
}

/// The curvature tensor; jet order drops by one.
pub fn riemann<F: Scalar>(gamma: &Tensor<F>) -> Result<Tensor<F>> {
    check_connection(gamma)?;
    need_order(gamma, 1)?;
    let n = gamma.dim();
    let dg = gamma.partial()?; // [a, c, b, d] = ∂_aΓ^c_{bd}
    let order = gamma.order() - 1;
    let g = gamma.truncate(order);
    Ok(Tensor::from_fn(n, CURVATURE_SLOTS.to_vec(), |ix| {
        let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        if a == b {
            return Jet::zero(n, order);
        }
        let mut acc = dg.get(&[a, c, b, d]) - dg.get(&[b, c, a, d]);
        for e in 0..n {
            acc.mul_acc(g.get(&[c, a, e]), g.get(&[e, b, d]));
            let neg = g.get(&[c, b, e]).neg_jet();
            acc.mul_acc(&neg, g.get(&[e, a, d]));
        }
        acc
    }))
}

/// `R = W + 2δ^c_{[a}P_{b]d} + β_{ab}δ^c_d` and its ingredients.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveCurvature<F: Scalar> {
    pub r: Tensor<F>,
    pub ric: Tensor<F>,
    pub beta: Tensor<F>,
    pub p: Tensor<F>,
    pub w: Tensor<F>,
}

/// `2δ^c_{[a}P_{b]d} + β_{ab}δ^c_d`, the non-Weyl part of a curvature tensor.
pub fn trace_part<F: Scalar>(p: &Tensor<F>, beta: &Tensor<F>) -> Tensor<F> {
    let n = p.dim();
    let order = p.order().min(beta.order());
    Tensor::from_fn(n, CURVATURE_SLOTS.to_vec(), |ix| {
        let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = Jet::zero(n, order);
        if c == a {
            acc.add_assign_jet(p.get(&[b, d]));
        }
        if c == b {
            acc.sub_assign_jet(p.get(&[a, d]));
        }
        if c == d {
            acc.add_assign_jet(beta.get(&[a, b]));
        }
        acc
    })
}

/// Splits a curvature-type tensor into Weyl, Schouten and trace parts.
pub fn decompose<F: Scalar>(r: &Tensor<F>) -> Result<ProjectiveCurvature<F>> {
    check_curvature(r)?;
    let n = r.dim() as i64;
    if n < 2 {
        return Err(Error::DimensionMismatch("need n >= 2".into()));
    }
    let ric = r.contract(2, 0)?; // R_{cb}^c_d
    let beta = r.contract(2, 3)?.scale(&inv(n + 1));
    let p = ric.add(&beta)?.scale(&inv(n - 1));
    let w = r.sub(&trace_part(&p, &beta))?;
    Ok(ProjectiveCurvature { r: r.clone(), ric, beta, p, w })
}

impl<F: Scalar> ProjectiveCurvature<F> {
    pub fn of_connection(gamma: &Tensor<F>) -> Result<Self> {
        decompose(&riemann(gamma)?)
    }

    /// Difference `R − (W + 2δP + βδ)`; zero by construction.
    pub fn reassembly_residual(&self) -> Result<Tensor<F>> {
        self.r.sub(&self.w.add(&trace_part(&self.p, &self.beta))?)
    }

    /// `β_{ab} + 2P_{[ab]}`; zero by construction.
    pub fn beta_residual(&self) -> Result<Tensor<F>> {
        let skew = self.p.alternate(&[0, 1])?.scale(&F::from_i64(2));
        self.beta.add(&skew)
    }

    /// Traces and Bianchi sum of `W`, which all vanish for a Weyl tensor.
    pub fn weyl_symmetry_residuals(&self) -> Result<Vec<Tensor<F>>> {
        Ok(vec![
            self.w.contract(2, 0)?,
            self.w.contract(2, 1)?,
            self.w.contract(2, 3)?,
            self.w.alternate(&[0, 1, 3])?,
            self.w.add(&self.w.permute(&[1, 0, 2, 3])?)?,
        ])
    }
}

/// `C_{dab} = ∇_aP_{bd} − ∇_bP_{ad}`.
pub fn cotton<F: Scalar>(gamma: &Tensor<F>, p: &Tensor<F>) -> Result<Tensor<F>> {
    need_order(p, 1)?;
    let dp = p.covariant_derivative(gamma, None)?; // [a, b, d]
    let n = p.dim();
    Ok(Tensor::from_fn(n, vec![Var::Down; 3], |ix| {
        let (d, a, b) = (ix[0], ix[1], ix[2]);
        dp.get(&[a, b, d]) - dp.get(&[b, a, d])
    }))
}

/// `∇_cW_{ab}{}^c{}_d − (n−2)C_{dab}`, slots `[a, b, d]`; zero for every
/// torsion-free connection.
pub fn cotton_bianchi_residual<F: Scalar>(gamma: &Tensor<F>, w: &Tensor<F>, c: &Tensor<F>) -> Result<Tensor<F>> {
    let n = w.dim() as i64;
    let div_w = w.covariant_derivative(gamma, None)?.contract(3, 0)?; // [a, b, d]
    let c_abd = c.permute(&[1, 2, 0])?.scale(&F::from_i64(n - 2));
    div_w.sub(&c_abd)
}

/// All curvature quantities of one connection jet.
#[derive(Clone, Debug)]
pub struct ConnectionCurvature<F: Scalar> {
    pub gamma: Tensor<F>,
    pub curv: ProjectiveCurvature<F>,
    pub cotton: Tensor<F>,
}

impl<F: Scalar> ConnectionCurvature<F> {
    pub fn new(gamma: &Tensor<F>) -> Result<Self> {
        let curv = ProjectiveCurvature::of_connection(gamma)?;
        let cotton = cotton(gamma, &curv.p)?;
        Ok(ConnectionCurvature { gamma: gamma.clone(), curv, cotton })
    }
}

/// `Γ̂^i_{jk} = Γ^i_{jk} + Υ_jδ^i_k + Υ_kδ^i_j`.
pub fn projective_shift<F: Scalar>(gamma: &Tensor<F>, upsilon: &Tensor<F>) -> Result<Tensor<F>> {
    check_connection(gamma)?;
    if upsilon.slots() != [Var::Down] {
        return Err(Error::VarianceMismatch("Υ must be a 1-form".into()));
    }
    let n = gamma.dim();
    let mut out = gamma.clone();
    for i in 0..n {
        for j in 0..n {
            let mut g = out.get(&[i, j, i]).clone();
            g.add_assign_jet(upsilon.get(&[j]));
            out.set(&[i, j, i], g);
            let mut g = out.get(&[i, i, j]).clone();
            g.add_assign_jet(upsilon.get(&[j]));
            out.set(&[i, i, j], g);
        }
    }
    Ok(out)
}

/// Predicted `(P̂, β̂)` after a projective change by `Υ`:
/// `P̂ = P − ∇Υ + Υ⊗Υ`, `β̂ = β + ∂_aΥ_b − ∂_bΥ_a`.
pub fn schouten_transform<F: Scalar>(
    gamma: &Tensor<F>,
    p: &Tensor<F>,
    beta: &Tensor<F>,
    upsilon: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>)> {
    let du = upsilon.covariant_derivative(gamma, None)?;
    let uu = upsilon.product(upsilon)?;
    let p_hat = p.sub(&du)?.add(&uu)?;
    let d = upsilon.partial()?;
    let curl = d.sub(&d.permute(&[1, 0])?)?;
    let beta_hat = beta.add(&curl)?;
    Ok((p_hat, beta_hat))
}

/// `C′ − (C + W_{ij}{}^l{}_kΥ_l)` where `C′` is the Cotton tensor of the
/// shifted connection; identically zero.
pub fn cotton_transform_residual<F: Scalar>(gamma: &Tensor<F>, upsilon: &Tensor<F>) -> Result<Tensor<F>> {
    let base = ConnectionCurvature::new(gamma)?;
    let shifted = ConnectionCurvature::new(&projective_shift(gamma, upsilon)?)?;
    let wu = base.curv.w.contract_with(2, upsilon, 0)?; // [i, j, k]
    let predicted = base.cotton.add(&wu.permute(&[2, 0, 1])?)?;
    shifted.cotton.sub(&predicted)
}

/// Curvature of the induced connection on projective densities.
#[derive(Clone, Debug)]
pub struct ScaleReport<F: Scalar> {
    /// `F_{ab} = ∂_aθ_b − ∂_bθ_a` with `θ_a = Γ^c_{ac}/(n+1)`.
    pub f: Tensor<F>,
    pub is_scale: bool,
}

pub fn scale_report<F: Scalar>(gamma: &Tensor<F>, tol: f64) -> Result<ScaleReport<F>> {
    let theta = coordinate_density_form(gamma)?;
    let d = theta.partial()?;
    let f = d.sub(&d.permute(&[1, 0])?)?;
    let scale = gamma.max_abs().max(1.0);
    let is_scale = f.negligible(scale, tol);
    Ok(ScaleReport { f, is_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type T = Tensor<Rational>;

    fn poly_gamma(n: usize, order: usize, p: &[Rational]) -> T {
        let xs: Vec<Jet<Rational>> = (0..n).map(|v| Jet::variable(n, order, v, p[v].clone())).collect();
        T::from_fn(n, CONNECTION_SLOTS.to_vec(), |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let s = (i + 2 * (j + k)) as i64 % 5 - 2;
            let mut acc = xs[(i + j + k) % n].scale(&Rational::integer(s));
            acc = &acc * &xs[(j * k + i) % n];
            acc.add_assign_jet(&xs[(j + k) % n].scale(&Rational::new(1, (i + 2) as i64)));
            acc
        })
    }

    fn point(n: usize) -> Vec<Rational> {
        (0..n).map(|i| Rational::new(i as i64 + 1, 3)).collect()
    }

    #[test]
    fn flat_connection_has_no_curvature() {
        let g = T::zeros(3, CONNECTION_SLOTS.to_vec(), 3);
        let pc = ProjectiveCurvature::of_connection(&g).unwrap();
        assert!(pc.r.is_zero() && pc.w.is_zero() && pc.p.is_zero() && pc.beta.is_zero());
        assert!(cotton(&g, &pc.p).unwrap().is_zero());
    }

    #[test]
    fn decomposition_identities_hold_exactly() {
        for n in 2..=4 {
            let g = poly_gamma(n, 3, &point(n));
            let pc = ProjectiveCurvature::of_connection(&g).unwrap();
            assert!(pc.reassembly_residual().unwrap().is_zero());
            assert!(pc.beta_residual().unwrap().is_zero());
            for r in pc.weyl_symmetry_residuals().unwrap() {
                assert!(r.is_zero());
            }
            assert!(pc.r.add(&pc.r.permute(&[1, 0, 2, 3]).unwrap()).unwrap().is_zero());
            if n == 2 {
                assert!(pc.w.is_zero());
            }
            let c = cotton(&g, &pc.p).unwrap();
            assert!(cotton_bianchi_residual(&g, &pc.w, &c).unwrap().is_zero());
        }
    }

    #[test]
    fn beta_is_density_curvature() {
        let g = poly_gamma(3, 2, &point(3));
        let pc = ProjectiveCurvature::of_connection(&g).unwrap();
        let sr = scale_report(&g, 0.0).unwrap();
        assert_eq!(sr.f, pc.beta);
    }

    #[test]
    fn shift_by_one_form_on_flat_plane() {
        // Γ = 0 in n = 2 shifted by Υ = dx¹ (constant): P̂ = Υ⊗Υ, β̂ = 0
        let n = 2;
        let g = T::zeros(n, CONNECTION_SLOTS.to_vec(), 3);
        let u = T::from_fn(n, vec![Var::Down], |i| Jet::constant(n, 3, Rational::integer((i[0] == 0) as i64)));
        let shifted = projective_shift(&g, &u).unwrap();
        let pc = ProjectiveCurvature::of_connection(&shifted).unwrap();
        let (p_hat, b_hat) = schouten_transform(&g, &T::zeros(n, vec![Var::Down; 2], 2), &T::zeros(n, vec![Var::Down; 2], 2), &u).unwrap();
        assert_eq!(pc.p, p_hat.truncate(2));
        assert_eq!(pc.beta, b_hat.truncate(2));
        assert_eq!(*pc.p.at(&[0, 0]), Rational::one());
    }
}
