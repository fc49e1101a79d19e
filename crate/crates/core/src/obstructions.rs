//! Chern-type curvature forms and the wedge-power obstruction.
//!
//! For a curvature-type tensor with matrices `M_{ab} = (R_{ab}{}^s{}_t)`,
//! `p_k = Alt_{a₁…a_{2k}} tr(M_{a₁a₂} ⋯ M_{a_{2k−1}a_{2k}})` with the `1/k!`
//! alternation weight. Forms are stored by strictly increasing index tuples.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{binomial, det_scalar, matmul, maximal_minors, rank, JetMatrix};
use crate::projective::{ProjectiveCurvature, CURVATURE_SLOTS};
use crate::scalar::{factorial, Scalar};
use crate::tensor::{permutation_sign, Tensor, Var};
use crate::tractor::TractorCurvature;

/// A differential form stored by increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm<F: Scalar> {
    pub n: usize,
    pub degree: usize,
    pub components: BTreeMap<Vec<usize>, Jet<F>>,
}

/// Strictly increasing `k`-tuples from `0..n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Orderings of `0..2k` into `k` pairs, each pair increasing, with signs.
fn ordered_pairings(k: usize) -> Vec<(Vec<(usize, usize)>, i64)> {
    fn rec(left: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if left.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..left.len() {
            for j in i + 1..left.len() {
                let (a, b) = (left[i], left[j]);
                let mut rest: Vec<usize> = left.iter().copied().filter(|&x| x != a && x != b).collect();
                cur.push((a, b));
                rec(&mut rest, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..2 * k).collect(), &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|pairs| {
            let flat: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            let s = permutation_sign(&flat);
            (pairs, s)
        })
        .collect()
}

impl<F: Scalar> DifferentialForm<F> {
    pub fn zero(n: usize, degree: usize, order: usize) -> Self {
        let components = increasing_tuples(n, degree).into_iter().map(|t| (t, Jet::zero(n, order))).collect();
        DifferentialForm { n, degree, components }
    }

    pub fn get(&self, tuple: &[usize]) -> Option<&Jet<F>> {
        self.components.get(tuple)
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(Jet::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.values().map(Jet::max_abs).fold(0.0, f64::max)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if self.n != o.n || self.degree != o.degree {
            return Err(Error::DimensionMismatch("forms of different type".into()));
        }
        let components = self.components.iter().map(|(t, j)| (t.clone(), j - &o.components[t])).collect();
        Ok(DifferentialForm { n: self.n, degree: self.degree, components })
    }

    pub fn truncate(&self, order: usize) -> Self {
        let components = self.components.iter().map(|(t, j)| (t.clone(), j.truncate(order))).collect();
        DifferentialForm { n: self.n, degree: self.degree, components }
    }

    /// The fully antisymmetric tensor with these components.
    pub fn to_tensor(&self) -> Tensor<F> {
        let order = self.components.values().map(Jet::order).min().unwrap_or(0);
        Tensor::from_fn(self.n, vec![Var::Down; self.degree], |ix| {
            let s = permutation_sign(ix);
            if s == 0 {
                return Jet::zero(self.n, order);
            }
            let mut sorted = ix.to_vec();
            sorted.sort_unstable();
            let j = self.components[&sorted].truncate(order);
            if s > 0 { j } else { j.neg_jet() }
        })
    }

    /// Reads the increasing-tuple components of an antisymmetric tensor.
    pub fn from_tensor(t: &Tensor<F>) -> Result<Self> {
        if t.slots().iter().any(|&v| v != Var::Down) {
            return Err(Error::VarianceMismatch("forms have lower slots".into()));
        }
        let (n, k) = (t.dim(), t.rank());
        let components = increasing_tuples(n, k).into_iter().map(|tp| (tp.clone(), t.get(&tp).clone())).collect();
        Ok(DifferentialForm { n, degree: k, components })
    }

    /// Exterior derivative, `(dω)_{a₀…a_k} = Σ_i (−1)^i ∂_{a_i}ω_{a₀…â_i…a_k}`.
    pub fn exterior_derivative(&self) -> Result<Self> {
        let order = self.components.values().map(Jet::order).min().unwrap_or(0);
        if order == 0 {
            return Err(Error::InsufficientOrder { need: 1, have: 0 });
        }
        let components = increasing_tuples(self.n, self.degree + 1)
            .into_iter()
            .map(|t| {
                let mut acc = Jet::zero(self.n, order - 1);
                for i in 0..t.len() {
                    let rest: Vec<usize> = t.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                    let d = self.components[&rest].partial(t[i]);
                    if i % 2 == 0 {
                        acc.add_assign_jet(&d);
                    } else {
                        acc.sub_assign_jet(&d);
                    }
                }
                (t, acc)
            })
            .collect();
        Ok(DifferentialForm { n: self.n, degree: self.degree + 1, components })
    }
}

/// `Alt tr(M_{a₁a₂}⋯M_{a_{2k−1}a_{2k}})` for matrices `M_{ab} = −M_{ba}`.
fn chain_form<F: Scalar>(n: usize, k: usize, order: usize, m: impl Fn(usize, usize) -> JetMatrix<F>) -> Result<DifferentialForm<F>> {
    if 2 * k > n {
        return Err(Error::Precondition(format!("2k = {} exceeds n = {n}", 2 * k)));
    }
    if k == 0 {
        return Err(Error::Precondition("k must be positive".into()));
    }
    let pairings = ordered_pairings(k);
    // each increasing-pair ordering stands for 2^k permutations
    let weight = F::from_i64(1 << k).div_ref(&factorial::<F>(2 * k))?;
    let mut cache: BTreeMap<(usize, usize), JetMatrix<F>> = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            cache.insert((a, b), m(a, b));
        }
    }
    let mut components = BTreeMap::new();
    for t in increasing_tuples(n, 2 * k) {
        let mut acc = Jet::zero(n, order);
        for (pairs, sign) in &pairings {
            let mut prod = cache[&(t[pairs[0].0], t[pairs[0].1])].clone();
            for &(a, b) in &pairs[1..] {
                prod = matmul(&prod, &cache[&(t[a], t[b])]);
            }
            let mut tr = Jet::zero(n, order);
            for (i, row) in prod.iter().enumerate() {
                tr.add_assign_jet(&row[i]);
            }
            if *sign > 0 {
                acc.add_assign_jet(&tr);
            } else {
                acc.sub_assign_jet(&tr);
            }
        }
        components.insert(t, acc.scale(&weight));
    }
    Ok(DifferentialForm { n, degree: 2 * k, components })
}

fn curvature_matrix<F: Scalar>(r: &Tensor<F>, a: usize, b: usize) -> JetMatrix<F> {
    let n = r.dim();
    (0..n).map(|s| (0..n).map(|t| r.get(&[a, b, s, t]).clone()).collect()).collect()
}

/// `p_k` of a curvature-type tensor (`R` or `W`).
pub fn p_form<F: Scalar>(r: &Tensor<F>, k: usize) -> Result<DifferentialForm<F>> {
    if r.slots() != CURVATURE_SLOTS {
        return Err(Error::VarianceMismatch("p_form needs a curvature-type tensor".into()));
    }
    chain_form(r.dim(), k, r.order(), |a, b| curvature_matrix(r, a, b))
}

/// `p_k(R)`, refusing connections that are not scale connections.
pub fn p_form_of_scale_connection<F: Scalar>(pc: &ProjectiveCurvature<F>, k: usize, tol: f64) -> Result<DifferentialForm<F>> {
    if !pc.beta.negligible(pc.r.max_abs().max(1.0), tol) {
        return Err(Error::Precondition(
            "connection is not a scale connection (β ≠ 0); p_k(R) is not a projective invariant here".into(),
        ));
    }
    p_form(&pc.r, k)
}

/// Brute-force `p_k`: builds the full chain tensor by contractions, traces
/// it and alternates over all `(2k)!` permutations. Small cases only.
pub fn p_form_bruteforce<F: Scalar>(r: &Tensor<F>, k: usize) -> Result<Tensor<F>> {
    let n = r.dim();
    if n > 4 || k > 2 || k == 0 || 2 * k > n {
        return Err(Error::Precondition(format!("brute force limited to n <= 4, 1 <= k <= 2 (n = {n}, k = {k})")));
    }
    // chain slots: a1 a2 s t (then a3 a4 appended, contracting t with next s)
    let mut chain = r.clone();
    for _ in 1..k {
        let last = chain.rank() - 1;
        let next = chain.contract_with(last, r, 2)?; // [..., s, a, b, t]
        let rk = next.rank();
        // move s to just before t: [..., a, b, s, t]
        let mut perm: Vec<usize> = (0..rk - 4).collect();
        perm.extend([rk - 3, rk - 2, rk - 4, rk - 1]);
        chain = next.permute(&perm)?;
    }
    let rk = chain.rank();
    let traced = chain.contract(rk - 2, rk - 1)?;
    let all: Vec<usize> = (0..2 * k).collect();
    traced.alternate(&all)
}

/// `q_k` of the tractor curvature.
pub fn q_form<F: Scalar>(omega: &TractorCurvature<F>, k: usize) -> Result<DifferentialForm<F>> {
    let n = omega.dim();
    let order = omega.get(0, 0)[0][0].order();
    chain_form(n, k, order, |a, b| omega.get(a, b).clone())
}

/// Top exterior power of a bundle map `E → F` given as a `rank E × rank F`
/// matrix at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeObstruction<F: Scalar> {
    pub rows: usize,
    pub cols: usize,
    /// All maximal minors, when there are at most [`MAX_MINORS`] of them.
    pub minors: Option<Vec<F>>,
    /// `det(AAᵀ) = Σ minor²` (Cauchy–Binet).
    pub gram_det: F,
    pub rank: usize,
    pub vanishes: bool,
}

pub const MAX_MINORS: u128 = 4096;

pub fn wedge_obstruction<F: Scalar>(a: &[Vec<F>], tol: f64) -> Result<WedgeObstruction<F>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows > cols {
        return Err(Error::Precondition(format!("rank E = {rows} exceeds rank F = {cols}")));
    }
    let gram: Vec<Vec<F>> = (0..rows)
        .map(|i| {
            (0..rows)
                .map(|j| {
                    let mut acc = F::zero();
                    for c in 0..cols {
                        acc.mul_acc(&a[i][c], &a[j][c]);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let gram_det = det_scalar(&gram);
    let rk = rank(a, tol);
    let minors = (binomial(cols, rows) <= MAX_MINORS).then(|| maximal_minors(a));
    let vanishes = rk < rows;
    Ok(WedgeObstruction { rows, cols, minors, gram_det, rank: rk, vanishes })
}

/// Matrix of `g_{de} ↦ W_{ab}{}^c{}_{(d}g_{e)c}` from symmetric 2-tensors
/// (basis `d ≤ e`) to `Λ² ⊗ S²` (basis `a < b`, `d ≤ e`), base-point values.
pub fn metric_symmetry_map<F: Scalar>(w: &Tensor<F>) -> Result<Vec<Vec<F>>> {
    if w.slots() != CURVATURE_SLOTS {
        return Err(Error::VarianceMismatch("Weyl-type tensor expected".into()));
    }
    let n = w.dim();
    let sym: Vec<(usize, usize)> = (0..n).flat_map(|d| (d..n).map(move |e| (d, e))).collect();
    let skew: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let half = F::one().div_ref(&F::from_i64(2))?;
    let rows = sym
        .iter()
        .map(|&(p, q)| {
            // basis element g = e_p ⊗ e_q + e_q ⊗ e_p (p < q) or e_p ⊗ e_p
            let g = |x: usize, y: usize| -> bool { (x == p && y == q) || (x == q && y == p) };
            let mut row = Vec::with_capacity(skew.len() * sym.len());
            for &(a, b) in &skew {
                for &(d, e) in &sym {
                    let mut acc = F::zero();
                    for c in 0..n {
                        if g(e, c) {
                            acc.add_assign_ref(w.at(&[a, b, c, d]));
                        }
                        if g(d, c) {
                            acc.add_assign_ref(w.at(&[a, b, c, e]));
                        }
                    }
                    row.push(acc.mul_ref(&half));
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// The brute-force oracle as a form, for comparisons.
pub fn bruteforce_form<F: Scalar>(r: &Tensor<F>, k: usize) -> Result<DifferentialForm<F>> {
    DifferentialForm::from_tensor(&p_form_bruteforce(r, k)?)
}

/// Value of `ω^{∧k}` (standard wedge, `ω^{∧k} = ((2k)!/2^k)·Alt(ω^{⊗k})`) on
/// an increasing tuple, for a constant 2-form given by its matrix.
pub fn wedge_power_component<F: Scalar>(omega: &[Vec<F>], k: usize, tuple: &[usize]) -> F {
    assert_eq!(tuple.len(), 2 * k);
    let mut acc = F::zero();
    for (pairs, sign) in ordered_pairings(k) {
        let mut t = F::one();
        for (a, b) in pairs {
            t = t.mul_ref(&omega[tuple[a]][tuple[b]]);
        }
        acc = if sign > 0 { acc.add_ref(&t) } else { acc.sub_ref(&t) };
    }
    acc
}

/// Algebraic curvature `A_{ab}{}^c{}_d = 2ω_{ab}B^c{}_d − ω_{da}B^c{}_b − ω_{bd}B^c{}_a`
/// (constant jets) from a 2-form `ω` and an endomorphism `B` (`b[c][d] = B^c{}_d`).
/// It has Weyl symmetries when `tr B = 0` and `ω(·, B·) = 0`.
pub fn omega_b_curvature<F: Scalar>(omega: &[Vec<F>], b: &[Vec<F>]) -> Tensor<F> {
    let n = omega.len();
    let two = F::from_i64(2);
    Tensor::from_fn(n, CURVATURE_SLOTS.to_vec(), |ix| {
        let (a, bb, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        let v = two
            .mul_ref(&omega[a][bb])
            .mul_ref(&b[c][d])
            .sub_ref(&omega[d][a].mul_ref(&b[c][bb]))
            .sub_ref(&omega[bb][d].mul_ref(&b[c][a]));
        Jet::constant(n, 0, v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{builtin, random_polynomial_connection};
    use crate::scalar::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn ordered_pairings_count() {
        assert_eq!(ordered_pairings(1).len(), 1);
        assert_eq!(ordered_pairings(2).len(), 6);
        assert_eq!(ordered_pairings(3).len(), 90);
    }

    #[test]
    fn flat_forms_vanish() {
        let r = Tensor::<Rational>::zeros(4, CURVATURE_SLOTS.to_vec(), 1);
        assert!(p_form(&r, 2).unwrap().is_zero());
        assert!(p_form(&r, 3).is_err());
    }

    #[test]
    fn chain_form_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let src = random_polynomial_connection(4, 2, &mut rng);
        let p = vec![q("1/2"), q("-1/3"), q("1/5"), q("1")];
        let gamma = src.christoffel_jet(&p, 2).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        for k in 1..=2 {
            assert_eq!(p_form(&pc.r, k).unwrap(), bruteforce_form(&pc.r, k).unwrap(), "k = {k}");
            assert_eq!(p_form(&pc.w, k).unwrap(), bruteforce_form(&pc.w, k).unwrap(), "k = {k}");
        }
    }

    #[test]
    fn chern_forms_are_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let src = random_polynomial_connection(4, 2, &mut rng);
        let p = vec![q("1/2"), q("-1/3"), q("1/5"), q("1")];
        let gamma = src.christoffel_jet(&p, 3).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        for k in 1..=2 {
            assert!(p_form(&pc.r, k).unwrap().exterior_derivative().unwrap().is_zero());
        }
    }

    #[test]
    fn wedge_obstruction_basics() {
        let id: Vec<Vec<Rational>> = vec![vec![q("1"), q("0")], vec![q("0"), q("1")]];
        let w = wedge_obstruction(&id, 0.0).unwrap();
        assert!(!w.vanishes);
        assert_eq!(w.minors, Some(vec![q("1")]));
        let ker: Vec<Vec<Rational>> = vec![vec![q("1"), q("2"), q("0")], vec![q("2"), q("4"), q("0")]];
        let w = wedge_obstruction(&ker, 0.0).unwrap();
        assert!(w.vanishes && w.gram_det.is_zero());
        assert!(wedge_obstruction(&[vec![q("1")], vec![q("2")]], 0.0).is_err());
    }

    #[test]
    fn metric_symmetry_map_kills_einstein_metric() {
        let b = builtin("s2xs2", None).unwrap();
        let p = vec![q("1/2"), q("1/4"), q("-1/3"), q("0")];
        let gamma = b.source.christoffel_jet(&p, 1).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        let a = metric_symmetry_map(&pc.w).unwrap();
        assert_eq!((a.len(), a[0].len()), (10, 60));
        let w = wedge_obstruction(&a, 0.0).unwrap();
        assert!(w.vanishes);
        assert!(w.minors.is_none());
    }

    #[test]
    fn wedge_power_of_symplectic_form() {
        // ω = e12 + e34 + e56: ω^∧3 on (0..6) is 3! = 6
        let mut om = vec![vec![Rational::zero(); 6]; 6];
        for i in [0, 2, 4] {
            om[i][i + 1] = Rational::one();
            om[i + 1][i] = Rational::integer(-1);
        }
        assert_eq!(wedge_power_component(&om, 3, &[0, 1, 2, 3, 4, 5]), Rational::integer(6));
        assert_eq!(wedge_power_component(&om, 1, &[0, 1]), Rational::one());
    }
}
