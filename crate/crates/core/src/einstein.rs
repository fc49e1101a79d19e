//! Detector for projective classes containing an Einstein Levi-Civita
//! connection.
//!
//! With a left inverse `D` of the Weyl map (`D^{ab}{}_m{}^k W_{ab}{}^l{}_k = δ_m^l`)
//! and `u_i = D^{ab}{}_i{}^c C_{cab}`:
//!
//! * `Υ = −u` is the only candidate change to an Einstein connection,
//! * `G_{ij} = P_{ij} + ∇_iu_j + u_iu_j` is projectively invariant,
//! * `E_{ijk} = ∇_iG_{jk} + 2G_{jk}u_i + G_{ji}u_k + G_{ik}u_j` is too,
//! * `γ = G_{[a₁|b₁|}⋯G_{a_n]b_n}` (both index sets skewed) `= det G / n!`.

use crate::connection::ConnectionField;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{identity, left_inverse_flat, matmul, weyl_genericity, EndomorphismDensity, GenericityMargin, JetMatrix};
use crate::projective::{cotton, ProjectiveCurvature, CURVATURE_SLOTS};
use crate::scalar::{factorial, Scalar};
use crate::tensor::{multi_indices, permutation_sign, permutations, Tensor, Var};

/// Jet order of the Christoffel symbols needed for `E`.
pub const CONNECTION_ORDER: usize = 4;

/// Inputs `(N̲, F)` of the natural construction: a partition
/// `N₀ + ⋯ + N_r = N` and, for each block `j`, the group (1-based) of each of
/// its `2N_j` form indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalQSpec {
    pub partition: Vec<usize>,
    pub assignment: Vec<Vec<usize>>,
}

impl NaturalQSpec {
    pub fn new(partition: Vec<usize>, assignment: Vec<Vec<usize>>) -> Self {
        NaturalQSpec { partition, assignment }
    }

    /// Even `n = 2m`: `N̲ = (m)`, `F ≡ 1`. Odd `n`: `N̲ = (n)` with the last
    /// `n` indices in group 1 and the first `n` in group 2.
    pub fn standard(n: usize) -> Self {
        if n % 2 == 0 {
            NaturalQSpec::new(vec![n / 2], vec![vec![1; n]])
        } else {
            let mut f = vec![2; n];
            f.extend(vec![1; n]);
            NaturalQSpec::new(vec![n], vec![f])
        }
    }

    pub fn total(&self) -> usize {
        self.partition.iter().sum()
    }

    /// Checks validity for `R = r` in dimension `n`; returns the number of
    /// index groups `(2N + R)/n`.
    pub fn validate(&self, n: usize, r: usize) -> Result<usize> {
        let bad = |m: String| Err(Error::Precondition(m));
        if self.partition.is_empty() || self.assignment.len() != self.partition.len() {
            return bad("one assignment row per partition block is required".into());
        }
        for (j, (&nj, f)) in self.partition.iter().zip(&self.assignment).enumerate() {
            if f.len() != 2 * nj {
                return bad(format!("block {j} has {} assigned indices, expected {}", f.len(), 2 * nj));
            }
        }
        if r >= n {
            return bad(format!("R = {r} must be below n = {n}"));
        }
        let total = 2 * self.total() + r;
        if total == 0 || total % n != 0 {
            return bad(format!("2N + R = {total} is not a positive multiple of n = {n}"));
        }
        let groups = total / n;
        let mut counts = vec![0usize; groups + 1];
        for &g in self.assignment.iter().flatten() {
            if g == 0 || g > groups {
                return bad(format!("group {g} outside 1..={groups}"));
            }
            counts[g] += 1;
        }
        if counts[1] != n - r {
            return bad(format!("group 1 has {} indices, expected n − R = {}", counts[1], n - r));
        }
        if let Some(i) = (2..=groups).find(|&i| counts[i] != n) {
            return bad(format!("group {i} has {} indices, expected {n}", counts[i]));
        }
        Ok(groups)
    }

    /// `(N̲′, F′)`: drops the last two indices of block 0, which must lie in
    /// group 1 so that `(N − 1, 2, N̲′, F′)` is valid.
    pub fn reduced(&self) -> Result<Self> {
        let f0 = self.assignment.first().ok_or_else(|| Error::Precondition("empty partition".into()))?;
        if self.partition[0] == 0 {
            return Err(Error::Precondition("N₀ must be positive".into()));
        }
        if f0[f0.len() - 2..] != [1, 1] {
            return Err(Error::Precondition("the last two indices of block 0 must be in group 1".into()));
        }
        let mut out = self.clone();
        out.partition[0] -= 1;
        out.assignment[0].truncate(f0.len() - 2);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeftInverseStrategy {
    PseudoInverse,
    NaturalQ(NaturalQSpec),
}

impl LeftInverseStrategy {
    pub fn name(&self) -> String {
        match self {
            LeftInverseStrategy::PseudoInverse => "pseudo-inverse".into(),
            LeftInverseStrategy::NaturalQ(s) => format!("natural-q {:?} {:?}", s.partition, s.assignment),
        }
    }
}

fn weyl_matrices<F: Scalar>(w: &Tensor<F>) -> Vec<JetMatrix<F>> {
    let n = w.dim();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push((0..n).map(|s| (0..n).map(|t| w.get(&[a, b, s, t]).clone()).collect()).collect());
        }
    }
    out
}

/// `(Q^{N̲,F})^{b₁⋯b_R}{}_t{}^s`, slots `[Up; R] ++ [Down t, Up s]`, built
/// from chains `(P^k)^s{}_t = W_{a_{2k−1}a_{2k}}{}^s{}_{c}⋯W_{a₁a₂}{}^{c₁}{}_t`,
/// traced for blocks `j ≥ 1` and contracted group-wise with the coordinate
/// symbol (the unnormalised dual).
pub fn natural_q<F: Scalar>(w: &Tensor<F>, spec: &NaturalQSpec, r: usize) -> Result<Tensor<F>> {
    if w.slots() != CURVATURE_SLOTS {
        return Err(Error::VarianceMismatch("natural_q needs a Weyl-type tensor".into()));
    }
    let n = w.dim();
    let groups = spec.validate(n, r)?;
    let order = w.order();
    let mats = weyl_matrices(w);
    let m = |a: usize, b: usize| &mats[a * n + b];

    // flat index positions, block by block
    let mut block_of = Vec::new();
    let mut group_pos: Vec<Vec<usize>> = vec![Vec::new(); groups + 1];
    for (j, f) in spec.assignment.iter().enumerate() {
        for &g in f {
            group_pos[g].push(block_of.len());
            block_of.push(j);
        }
    }
    let npos = block_of.len();
    let full_perms = permutations(n);
    let mut slots = vec![Var::Up; r];
    slots.extend([Var::Down, Var::Up]);
    let mut q = Tensor::zeros(n, slots, order).with_weight(-((n as i32) + 1) * groups as i32);

    for b in multi_indices(n, r) {
        if permutation_sign(&b) == 0 {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|v| !b.contains(v)).collect();
        let mut g1 = Vec::new();
        for (p, _) in permutations(n - r) {
            let vals: Vec<usize> = p.iter().map(|&i| comp[i]).collect();
            let mut full = b.clone();
            full.extend(&vals);
            g1.push((vals, permutation_sign(&full)));
        }
        let mut acc: JetMatrix<F> = vec![vec![Jet::zero(n, order); n]; n];
        let mut idx = vec![0usize; npos];
        let sum_assignments = |idx: &[usize], sign: i64, acc: &mut JetMatrix<F>| {
            let chain = |block: usize| -> JetMatrix<F> {
                let ix: Vec<usize> = (0..npos).filter(|&p| block_of[p] == block).map(|p| idx[p]).collect();
                let mut mat = identity::<F>(n, n, order);
                for pair in ix.chunks(2) {
                    mat = matmul(m(pair[0], pair[1]), &mat);
                }
                mat
            };
            let mut factor = Jet::constant(n, order, F::from_i64(sign));
            for j in 1..spec.partition.len() {
                let c = chain(j);
                let mut tr = Jet::zero(n, order);
                for (i, row) in c.iter().enumerate() {
                    tr.add_assign_jet(&row[i]);
                }
                factor = &factor * &tr;
            }
            if factor.is_zero() {
                return;
            }
            let c0 = chain(0);
            for t in 0..n {
                for s in 0..n {
                    acc[t][s].mul_acc(&factor, &c0[s][t]);
                }
            }
        };
        // odometer over the per-group choices
        let choices: Vec<usize> = (1..=groups).map(|g| if g == 1 { g1.len() } else { full_perms.len() }).collect();
        let mut pick = vec![0usize; groups];
        'outer: loop {
            let mut sign = 1i64;
            for (gi, &c) in pick.iter().enumerate() {
                let g = gi + 1;
                let (vals, sg): (&[usize], i64) = if g == 1 {
                    (&g1[c].0, g1[c].1)
                } else {
                    (&full_perms[c].0, full_perms[c].1)
                };
                sign *= sg;
                for (k, &p) in group_pos[g].iter().enumerate() {
                    idx[p] = vals[k];
                }
            }
            sum_assignments(&idx, sign, &mut acc);
            for gi in 0..groups {
                pick[gi] += 1;
                if pick[gi] < choices[gi] {
                    continue 'outer;
                }
                pick[gi] = 0;
            }
            break;
        }
        for t in 0..n {
            for s in 0..n {
                let mut ix = b.clone();
                ix.extend([t, s]);
                q.set(&ix, acc[t][s].clone());
            }
        }
    }
    Ok(q)
}

/// `Q^{N̲,F}` as an endomorphism density `m[r][j] = Q_r{}^j`.
fn q_endomorphism<F: Scalar>(q: &Tensor<F>) -> Result<EndomorphismDensity<F>> {
    let n = q.dim();
    EndomorphismDensity::new((0..n).map(|r| (0..n).map(|j| q.get(&[r, j]).clone()).collect()).collect(), q.weight())
}

/// `‖Q^{N̲,F}‖`, the determinant of the `R = 0` tensor.
pub fn natural_q_norm<F: Scalar>(w: &Tensor<F>, spec: &NaturalQSpec) -> Result<Jet<F>> {
    Ok(q_endomorphism(&natural_q(w, spec, 0)?)?.det_adj()?.0)
}

/// `D_{(Q)}^{b₁b₂}{}_i{}^k = ‖Q‖⁻¹ adj(Q)_i{}^r (Q′)^{b₁b₂}{}_r{}^k`.
pub fn natural_left_inverse<F: Scalar>(w: &Tensor<F>, spec: &NaturalQSpec, tol: f64) -> Result<Tensor<F>> {
    let n = w.dim();
    let q = natural_q(w, spec, 0)?;
    let qp = natural_q(w, &spec.reduced()?, 2)?;
    let (det, adj) = q_endomorphism(&q)?.det_adj()?;
    let scale = q.max_abs_value().powi(n as i32);
    if det.value().negligible(scale, tol) {
        return Err(Error::GenericityFailure("‖Q‖ vanishes at the base point".into()));
    }
    let inv = det.recip()?;
    let order = det.order().min(qp.order());
    let d = Tensor::from_fn(n, vec![Var::Up, Var::Up, Var::Down, Var::Up], |ix| {
        let (b1, b2, i, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = Jet::zero(n, order);
        for r in 0..n {
            acc.mul_acc(&adj.m[i][r], qp.get(&[b1, b2, r, k]));
        }
        &acc * &inv
    });
    Ok(d.with_weight(qp.weight() + adj.weight - q.weight() * n as i32))
}

/// Left inverse of the Weyl map by the chosen strategy.
pub fn left_inverse<F: Scalar>(w: &Tensor<F>, strategy: &LeftInverseStrategy, tol: f64) -> Result<Tensor<F>> {
    match strategy {
        LeftInverseStrategy::PseudoInverse => left_inverse_flat(w, None, tol),
        LeftInverseStrategy::NaturalQ(spec) => natural_left_inverse(w, spec, tol),
    }
}

/// `D^{ab}{}_m{}^k W_{ab}{}^l{}_k`, slots `[m, l]`.
pub fn left_inverse_residual<F: Scalar>(d: &Tensor<F>, w: &Tensor<F>) -> Result<Tensor<F>> {
    let n = w.dim();
    let dw = d.contract_many(w, &[(0, 0), (1, 1), (3, 3)])?;
    let delta = Tensor::delta(n, dw.order());
    dw.sub(&Tensor::from_data(n, vec![Var::Down, Var::Up], delta.data().to_vec()).with_weight(dw.weight()))
}

/// `u_i = D^{ab}{}_i{}^c C_{cab}`.
pub fn d_dot_c<F: Scalar>(d: &Tensor<F>, c: &Tensor<F>) -> Result<Tensor<F>> {
    d.contract_many(c, &[(0, 1), (1, 2), (3, 0)])
}

/// The candidate change `Υ_i = −D^{ab}{}_i{}^c C_{cab}`.
pub fn upsilon<F: Scalar>(d: &Tensor<F>, c: &Tensor<F>) -> Result<Tensor<F>> {
    Ok(d_dot_c(d, c)?.neg())
}

/// `G_{ij} = P_{ij} + ∇_iu_j + u_iu_j`.
pub fn g_tensor<F: Scalar>(gamma: &Tensor<F>, p: &Tensor<F>, u: &Tensor<F>) -> Result<Tensor<F>> {
    let du = u.covariant_derivative(gamma, None)?;
    let order = du.order();
    p.truncate(order).add(&du)?.add(&u.product(u)?.truncate(order))
}

/// `γ = det(G)/n!` in the chart trivialization, weight `−2(n+1)`.
pub fn gamma_density<F: Scalar>(g: &Tensor<F>) -> Result<(Jet<F>, i32)> {
    let n = g.dim();
    let m = (0..n).map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect()).collect();
    let (det, _) = EndomorphismDensity::new(m, 0)?.det_adj()?;
    let inv = F::one().div_ref(&factorial::<F>(n))?;
    Ok((det.scale(&inv), -2 * (n as i32 + 1)))
}

/// `E_{ijk} = ∇_iG_{jk} + 2G_{jk}u_i + G_{ji}u_k + G_{ik}u_j`.
pub fn e_tensor<F: Scalar>(gamma: &Tensor<F>, g: &Tensor<F>, u: &Tensor<F>) -> Result<Tensor<F>> {
    let dg = g.covariant_derivative(gamma, None)?;
    let n = g.dim();
    let order = dg.order();
    let two = F::from_i64(2);
    Ok(Tensor::from_fn(n, vec![Var::Down; 3], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut acc = dg.get(ix).clone();
        acc.add_assign_jet(&(g.get(&[j, k]) * u.get(&[i])).truncate(order).scale(&two));
        acc.add_assign_jet(&(g.get(&[j, i]) * u.get(&[k])).truncate(order));
        acc.add_assign_jet(&(g.get(&[i, k]) * u.get(&[j])).truncate(order));
        acc
    }))
}

/// `2E_{[ij]k} = E_{ijk} − E_{jik}`.
pub fn e_skew<F: Scalar>(e: &Tensor<F>) -> Result<Tensor<F>> {
    e.sub(&e.permute(&[1, 0, 2])?)
}

/// `C_{kij} − W_{ij}{}^l{}_k u_l`, slots `[i, j, k]`: the obstruction to a
/// Cotton-flat connection in the class.
pub fn cotton_flat_obstruction<F: Scalar>(w: &Tensor<F>, c: &Tensor<F>, u: &Tensor<F>) -> Result<Tensor<F>> {
    let wu = w.contract_with(2, u, 0)?; // [i, j, k]
    let order = wu.order().min(c.order());
    Ok(Tensor::from_fn(w.dim(), vec![Var::Down; 3], |ix| c.get(&[ix[2], ix[0], ix[1]]).truncate(order).sub_jet(&wu.get(ix).truncate(order))))
}

/// Everything the detector computes at a weakly generic point.
#[derive(Clone, Debug, PartialEq)]
pub struct Invariants<F: Scalar> {
    pub d: Tensor<F>,
    pub upsilon: Tensor<F>,
    pub g: Tensor<F>,
    pub gamma: Jet<F>,
    pub e: Tensor<F>,
    pub cotton_flat: Tensor<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointAnalysis<F: Scalar> {
    pub genericity: GenericityMargin,
    /// The connection at hand is itself Ricci-flat here (to jet order).
    pub ricci_flat: bool,
    /// Projective Weyl and Cotton tensors vanish here.
    pub projectively_flat: bool,
    /// `max |R|` at the point, the reference scale for float comparisons.
    pub scale: f64,
    pub invariants: std::result::Result<Invariants<F>, String>,
}

impl<F: Scalar> PointAnalysis<F> {
    fn small(&self, t: &Tensor<F>, tol: f64) -> bool {
        t.truncate(0).negligible(self.scale, tol)
    }
}

/// Runs the detector on a Christoffel jet of order ≥ 4.
pub fn analyze_point<F: Scalar>(gamma: &Tensor<F>, strategy: &LeftInverseStrategy, tol: f64) -> Result<PointAnalysis<F>> {
    if gamma.order() < CONNECTION_ORDER {
        return Err(Error::InsufficientOrder { need: CONNECTION_ORDER, have: gamma.order() });
    }
    let pc = ProjectiveCurvature::of_connection(gamma)?;
    let c = cotton(gamma, &pc.p)?;
    let scale = pc.r.max_abs_value();
    // the whole Ricci jet, not just its value, must vanish
    let ricci_flat = pc.ric.negligible(scale.max(1.0), tol);
    let projectively_flat = pc.w.truncate(0).negligible(scale.max(1.0), tol) && c.truncate(0).negligible(scale.max(1.0), tol);
    let genericity = weyl_genericity(&pc.w, tol)?;
    let invariants = if genericity.ok {
        match invariants(gamma, &pc, &c, strategy, tol) {
            Ok(inv) => Ok(inv),
            Err(Error::GenericityFailure(m)) => Err(m),
            Err(e) => return Err(e),
        }
    } else {
        Err(format!("weak genericity fails: Weyl map rank {} < {}", genericity.rank, gamma.dim()))
    };
    Ok(PointAnalysis { genericity, ricci_flat, projectively_flat, scale, invariants })
}

fn invariants<F: Scalar>(
    gamma: &Tensor<F>,
    pc: &ProjectiveCurvature<F>,
    c: &Tensor<F>,
    strategy: &LeftInverseStrategy,
    tol: f64,
) -> Result<Invariants<F>> {
    // C has order 2, which bounds everything built from D·C
    let w = pc.w.truncate(c.order());
    let d = left_inverse(&w, strategy, tol)?;
    let u = d_dot_c(&d, c)?;
    let g = g_tensor(gamma, &pc.p, &u)?;
    let (gamma_d, _) = gamma_density(&g)?;
    let e = e_tensor(gamma, &g, &u)?;
    let cotton_flat = cotton_flat_obstruction(&w, c, &u)?;
    Ok(Invariants { d, upsilon: u.neg(), g, gamma: gamma_d, e, cotton_flat })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    EinsteinNonzero,
    ProjectivelyRicciFlat,
    NotEinstein(String),
    Inconclusive(String),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::EinsteinNonzero => "EINSTEIN_NONZERO",
            Classification::ProjectivelyRicciFlat => "PROJECTIVELY_RICCI_FLAT",
            Classification::NotEinstein(_) => "NOT_EINSTEIN",
            Classification::Inconclusive(_) => "INCONCLUSIVE",
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Classification::NotEinstein(r) | Classification::Inconclusive(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<F: Scalar> {
    pub strategy: LeftInverseStrategy,
    pub points: Vec<PointAnalysis<F>>,
    pub classification: Classification,
    pub notes: Vec<String>,
}

fn list(ix: &[usize]) -> String {
    ix.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
}

/// Classifies a set of per-point analyses.
pub fn classify<F: Scalar>(points: &[PointAnalysis<F>], tol: f64) -> (Classification, Vec<String>) {
    let mut notes = Vec::new();
    let idx = |f: &dyn Fn(&PointAnalysis<F>) -> bool| -> Vec<usize> {
        points.iter().enumerate().filter(|(_, p)| f(p)).map(|(i, _)| i).collect()
    };
    if points.is_empty() {
        return (Classification::Inconclusive("no sample points".into()), notes);
    }
    if points.iter().all(|p| p.ricci_flat) {
        notes.push("the input connection is itself Ricci-flat at every sample point".into());
        return (Classification::ProjectivelyRicciFlat, notes);
    }
    let failed = idx(&|p| p.invariants.is_err());
    if !failed.is_empty() {
        let first = points[failed[0]].invariants.as_ref().err().cloned().unwrap_or_default();
        if failed.iter().all(|&i| points[i].projectively_flat) {
            notes.push("W and C vanish at the failing points: the class is projectively flat there".into());
        }
        return (Classification::Inconclusive(format!("{first} (points {})", list(&failed))), notes);
    }
    let inv: Vec<(&PointAnalysis<F>, &Invariants<F>)> =
        points.iter().map(|p| (p, p.invariants.as_ref().expect("checked above"))).collect();
    if inv.iter().all(|(p, i)| p.small(&i.g, tol)) {
        return (Classification::ProjectivelyRicciFlat, notes);
    }
    let bad: Vec<usize> = (0..inv.len()).filter(|&k| !inv[k].0.small(&inv[k].1.cotton_flat, tol)).collect();
    if !bad.is_empty() {
        return (
            Classification::NotEinstein(format!(
                "2E_[ij]k ≠ 0 at points {}: no Cotton-flat connection in the class",
                list(&bad)
            )),
            notes,
        );
    }
    let skew = |i: &Invariants<F>| i.g.sub(&i.g.permute(&[1, 0]).expect("rank 2")).expect("same slots");
    let bad: Vec<usize> = (0..inv.len()).filter(|&k| !inv[k].0.small(&skew(inv[k].1), tol)).collect();
    if !bad.is_empty() {
        return (Classification::NotEinstein(format!("G_[ij] ≠ 0 at points {}", list(&bad))), notes);
    }
    let bad: Vec<usize> = (0..inv.len()).filter(|&k| !inv[k].0.small(&inv[k].1.e, tol)).collect();
    if !bad.is_empty() {
        return (Classification::NotEinstein(format!("E_ijk ≠ 0 at points {}", list(&bad))), notes);
    }
    let n = inv[0].1.g.dim() as i32;
    let bad: Vec<usize> = (0..inv.len())
        .filter(|&k| {
            let (p, i) = inv[k];
            i.gamma.value().negligible(p.scale.powi(n), tol)
        })
        .collect();
    if !bad.is_empty() {
        let msg = format!("γ = 0 (G degenerate) at points {}", list(&bad));
        return if F::EXACT {
            (Classification::NotEinstein(msg), notes)
        } else {
            (Classification::Inconclusive(msg), notes)
        };
    }
    (Classification::EinsteinNonzero, notes)
}

/// Runs the detector at every point and classifies.
pub fn verdict<F: Scalar>(
    field: &ConnectionField,
    strategy: &LeftInverseStrategy,
    points: &[Vec<F>],
    tol: f64,
) -> Result<Verdict<F>> {
    let analyses = points
        .iter()
        .map(|p| analyze_point(&field.christoffel_jet(p, CONNECTION_ORDER)?, strategy, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(verdict_from(analyses, strategy.clone(), tol))
}

pub fn verdict_from<F: Scalar>(points: Vec<PointAnalysis<F>>, strategy: LeftInverseStrategy, tol: f64) -> Verdict<F> {
    let (classification, notes) = classify(&points, tol);
    Verdict { strategy, points, classification, notes }
}
