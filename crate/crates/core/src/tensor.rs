//! Dense tensors with jet-valued components.
//!
//! Components are stored row-major with slot 0 most significant. Each slot is
//! either contravariant ([`Var::Up`]) or covariant ([`Var::Down`]); an integer
//! projective weight `w` is carried as a bookkeeping tag and is used only by
//! [`Tensor::covariant_derivative`].

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{factorial, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Up,
    Down,
}

#[derive(Clone)]
pub struct Tensor<F> {
    n: usize,
    slots: Vec<Var>,
    weight: i32,
    data: Vec<Jet<F>>,
}

/// All permutations of `0..k` with their signs.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i64)>) {
        let k = used.len();
        if cur.len() == k {
            out.push((cur.clone(), permutation_sign(cur)));
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Sign of a permutation of `0..k`; 0 if the input repeats an entry.
pub fn permutation_sign(p: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] == p[j] {
                return 0;
            }
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// Iterates all multi-indices in `0..n` of length `rank`, row-major.
pub fn multi_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut f| {
        let mut idx = vec![0; rank];
        for s in (0..rank).rev() {
            idx[s] = f % n;
            f /= n;
        }
        idx
    })
}

impl<F: Scalar> Tensor<F> {
    pub fn zeros(n: usize, slots: Vec<Var>, order: usize) -> Self {
        let len = n.pow(slots.len() as u32);
        Tensor { n, slots, weight: 0, data: vec![Jet::zero(n, order); len] }
    }

    pub fn from_fn(n: usize, slots: Vec<Var>, mut f: impl FnMut(&[usize]) -> Jet<F>) -> Self {
        let data: Vec<Jet<F>> = multi_indices(n, slots.len()).map(|i| f(&i)).collect();
        Tensor { n, slots, weight: 0, data }
    }

    pub fn from_data(n: usize, slots: Vec<Var>, data: Vec<Jet<F>>) -> Self {
        assert_eq!(data.len(), n.pow(slots.len() as u32), "component count");
        Tensor { n, slots, weight: 0, data }
    }

    /// Rank-0 tensor holding one jet.
    pub fn scalar(j: Jet<F>) -> Self {
        let n = j.nvars();
        Tensor { n, slots: vec![], weight: 0, data: vec![j] }
    }

    /// Kronecker δ^a_b.
    pub fn delta(n: usize, order: usize) -> Self {
        Self::from_fn(n, vec![Var::Up, Var::Down], |i| {
            Jet::constant(n, order, if i[0] == i[1] { F::one() } else { F::zero() })
        })
    }

    /// Coordinate Levi-Civita symbol with `n` slots of the given variance.
    pub fn levi_civita_symbol(n: usize, var: Var, order: usize) -> Self {
        Self::from_fn(n, vec![var; n], |i| Jet::constant(n, order, F::from_i64(permutation_sign(i))))
    }

    pub fn with_weight(mut self, w: i32) -> Self {
        self.weight = w;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Var] {
        &self.slots
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn data(&self) -> &[Jet<F>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Jet<F>] {
        &mut self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet<F> {
        &self.data[self.flat_index(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut Jet<F> {
        let f = self.flat_index(idx);
        &mut self.data[f]
    }

    pub fn set(&mut self, idx: &[usize], v: Jet<F>) {
        let f = self.flat_index(idx);
        self.data[f] = v;
    }

    /// Value of a component at the base point.
    pub fn at(&self, idx: &[usize]) -> &F {
        self.get(idx).value()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Jet::is_zero)
    }

    /// Largest coefficient magnitude over all components and jet orders.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Largest component magnitude at the base point.
    pub fn max_abs_value(&self) -> f64 {
        self.data.iter().map(|j| j.value().magnitude()).fold(0.0, f64::max)
    }

    /// True when every coefficient is negligible (exactly zero on the exact ring).
    pub fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.data.iter().all(|j| j.coeffs().iter().all(|c| c.negligible(scale, tol)))
    }

    pub fn truncate(&self, order: usize) -> Self {
        self.map(|j| j.truncate(order))
    }

    pub fn map(&self, f: impl Fn(&Jet<F>) -> Jet<F>) -> Self {
        Tensor { n: self.n, slots: self.slots.clone(), weight: self.weight, data: self.data.iter().map(f).collect() }
    }

    pub fn convert<G: Scalar>(&self, f: impl Fn(&F) -> G + Copy) -> Tensor<G> {
        Tensor {
            n: self.n,
            slots: self.slots.clone(),
            weight: self.weight,
            data: self.data.iter().map(|j| j.convert(f)).collect(),
        }
    }

    fn check_same_shape(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, o.n)));
        }
        if self.slots != o.slots {
            return Err(Error::VarianceMismatch(format!("{:?} vs {:?}", self.slots, o.slots)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(Tensor { n: self.n, slots: self.slots.clone(), weight: self.weight, data })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check_same_shape(o)?;
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        Ok(Tensor { n: self.n, slots: self.slots.clone(), weight: self.weight, data })
    }

    pub fn neg(&self) -> Self {
        self.map(|j| -j)
    }

    pub fn scale(&self, s: &F) -> Self {
        self.map(|j| j.scale(s))
    }

    pub fn scale_jet(&self, s: &Jet<F>) -> Self {
        self.map(|j| j * s)
    }

    /// Outer product `a ⊗ b`; weights add.
    pub fn product(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, o.n)));
        }
        let mut data = Vec::with_capacity(self.data.len() * o.data.len());
        for a in &self.data {
            for b in &o.data {
                data.push(if a.is_zero() || b.is_zero() { Jet::zero(self.n, a.order().min(b.order())) } else { a * b });
            }
        }
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&o.slots);
        Ok(Tensor { n: self.n, slots, weight: self.weight + o.weight, data })
    }

    fn check_slot(&self, s: usize) -> Result<()> {
        if s >= self.rank() {
            return Err(Error::InvalidSlot(format!("slot {s} of a rank-{} tensor", self.rank())));
        }
        Ok(())
    }

    /// Trace over an up slot and a down slot.
    pub fn contract(&self, up: usize, down: usize) -> Result<Self> {
        self.check_slot(up)?;
        self.check_slot(down)?;
        if up == down || self.slots[up] != Var::Up || self.slots[down] != Var::Down {
            return Err(Error::VarianceMismatch(format!("cannot contract slots {up} and {down} of {:?}", self.slots)));
        }
        let slots: Vec<Var> =
            self.slots.iter().enumerate().filter(|&(i, _)| i != up && i != down).map(|(_, &v)| v).collect();
        let order = self.order();
        let n = self.n;
        let mut full = vec![0; self.rank()];
        let data = multi_indices(n, slots.len())
            .map(|idx| {
                let mut it = idx.iter();
                for (s, f) in full.iter_mut().enumerate() {
                    if s != up && s != down {
                        *f = *it.next().unwrap();
                    }
                }
                let mut acc = Jet::zero(n, order);
                for e in 0..n {
                    full[up] = e;
                    full[down] = e;
                    acc.add_assign_jet(&self.data[self.flat_index(&full)]);
                }
                acc
            })
            .collect();
        Ok(Tensor { n, slots, weight: self.weight, data })
    }

    /// Contracts slot `a` of `self` with slot `b` of `o` (opposite variances),
    /// producing `self`'s remaining slots followed by `o`'s.
    pub fn contract_with(&self, a: usize, o: &Self, b: usize) -> Result<Self> {
        self.contract_many(o, &[(a, b)])
    }

    /// Contracts several slot pairs between `self` and `o` at once.
    pub fn contract_many(&self, o: &Self, pairs: &[(usize, usize)]) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.n, o.n)));
        }
        for &(a, b) in pairs {
            self.check_slot(a)?;
            o.check_slot(b)?;
            if self.slots[a] == o.slots[b] {
                return Err(Error::VarianceMismatch(format!("slot {a} and slot {b} have equal variance")));
            }
        }
        let n = self.n;
        let keep_a: Vec<usize> = (0..self.rank()).filter(|s| pairs.iter().all(|p| p.0 != *s)).collect();
        let keep_b: Vec<usize> = (0..o.rank()).filter(|s| pairs.iter().all(|p| p.1 != *s)).collect();
        let mut slots: Vec<Var> = keep_a.iter().map(|&s| self.slots[s]).collect();
        slots.extend(keep_b.iter().map(|&s| o.slots[s]));
        let order = self.order().min(o.order());
        let mut ia = vec![0; self.rank()];
        let mut ib = vec![0; o.rank()];
        let sums: Vec<Vec<usize>> = multi_indices(n, pairs.len()).collect();
        let data = multi_indices(n, slots.len())
            .map(|idx| {
                for (k, &s) in keep_a.iter().enumerate() {
                    ia[s] = idx[k];
                }
                for (k, &s) in keep_b.iter().enumerate() {
                    ib[s] = idx[keep_a.len() + k];
                }
                let mut acc = Jet::zero(n, order);
                for e in &sums {
                    for (p, &(a, b)) in pairs.iter().enumerate() {
                        ia[a] = e[p];
                        ib[b] = e[p];
                    }
                    let (x, y) = (&self.data[self.flat_index(&ia)], &o.data[o.flat_index(&ib)]);
                    if !x.is_zero() && !y.is_zero() {
                        acc.mul_acc(x, y);
                    }
                }
                acc
            })
            .collect();
        Ok(Tensor { n, slots, weight: self.weight + o.weight, data })
    }

    /// Reorders slots: slot `i` of the result is slot `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rank() || permutation_sign(perm) == 0 || perm.iter().any(|&p| p >= self.rank()) {
            return Err(Error::InvalidSlot(format!("{perm:?} is not a permutation of the slots")));
        }
        let slots = perm.iter().map(|&p| self.slots[p]).collect();
        let mut src = vec![0; self.rank()];
        let data = multi_indices(self.n, self.rank())
            .map(|idx| {
                for (i, &p) in perm.iter().enumerate() {
                    src[p] = idx[i];
                }
                self.data[self.flat_index(&src)].clone()
            })
            .collect();
        Ok(Tensor { n: self.n, slots, weight: self.weight, data })
    }

    fn check_group(&self, group: &[usize]) -> Result<()> {
        for &s in group {
            self.check_slot(s)?;
            if self.slots[s] != self.slots[group[0]] {
                return Err(Error::VarianceMismatch(format!("slots {group:?} mix variances")));
            }
        }
        let mut g = group.to_vec();
        g.sort_unstable();
        g.dedup();
        if g.len() != group.len() {
            return Err(Error::InvalidSlot(format!("repeated slot in {group:?}")));
        }
        Ok(())
    }

    fn average_over(&self, group: &[usize], signed: bool) -> Result<Self> {
        self.check_group(group)?;
        let k = group.len();
        let perms = permutations(k);
        let inv = F::one().div_ref(&factorial::<F>(k))?;
        let mut src = vec![0; self.rank()];
        let data = multi_indices(self.n, self.rank())
            .map(|idx| {
                let mut acc = Jet::zero(self.n, self.order());
                src.copy_from_slice(&idx);
                for (p, sign) in &perms {
                    for (i, &s) in group.iter().enumerate() {
                        src[s] = idx[group[p[i]]];
                    }
                    let j = &self.data[self.flat_index(&src)];
                    if signed && *sign < 0 {
                        acc.sub_assign_jet(j);
                    } else {
                        acc.add_assign_jet(j);
                    }
                }
                acc.scale(&inv)
            })
            .collect();
        Ok(Tensor { n: self.n, slots: self.slots.clone(), weight: self.weight, data })
    }

    /// `T_{[a₁…a_k]}` with weight `1/k!`.
    pub fn alternate(&self, group: &[usize]) -> Result<Self> {
        self.average_over(group, true)
    }

    /// `T_{(a₁…a_k)}` with weight `1/k!`.
    pub fn symmetrize(&self, group: &[usize]) -> Result<Self> {
        self.average_over(group, false)
    }

    /// `∂_a T` as a new leading down slot; jet order drops by one.
    pub fn partial(&self) -> Result<Self> {
        let order = self.order();
        if order == 0 {
            return Err(Error::InsufficientOrder { need: 1, have: 0 });
        }
        let mut slots = vec![Var::Down];
        slots.extend_from_slice(&self.slots);
        let mut data = Vec::with_capacity(self.data.len() * self.n);
        for a in 0..self.n {
            for j in &self.data {
                data.push(j.truncate(order).partial(a));
            }
        }
        Ok(Tensor { n: self.n, slots, weight: self.weight, data })
    }

    /// `∇_a T` as a new leading down slot.
    ///
    /// `gamma` holds `Γ^c_{ab}` with slots `[Up, Down, Down]`. For nonzero
    /// weight `w` the term `w θ_a T` is added, where `theta` is the density
    /// connection form; when absent it defaults to the coordinate frame
    /// `θ_a = Γ^b_{ab}/(n+1)`.
    pub fn covariant_derivative(&self, gamma: &Tensor<F>, theta: Option<&Tensor<F>>) -> Result<Self> {
        if gamma.n != self.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", gamma.n, self.n)));
        }
        if gamma.slots != [Var::Up, Var::Down, Var::Down] {
            return Err(Error::VarianceMismatch("connection must have slots [Up, Down, Down]".into()));
        }
        let mut out = self.partial()?;
        let n = self.n;
        let rank = self.rank();
        let mut src = vec![0; rank];
        for (flat, idx) in multi_indices(n, rank + 1).enumerate() {
            let a = idx[0];
            let t = &idx[1..];
            let mut acc = std::mem::replace(&mut out.data[flat], Jet::zero(n, 0));
            for (s, var) in self.slots.iter().enumerate() {
                src.copy_from_slice(t);
                for e in 0..n {
                    src[s] = e;
                    let comp = &self.data[self.flat_index(&src)];
                    if comp.is_zero() {
                        continue;
                    }
                    match var {
                        // +Γ^c_{ae} T^{..e..}
                        Var::Up => {
                            let g = gamma.get(&[t[s], a, e]);
                            if !g.is_zero() {
                                acc.mul_acc(g, comp);
                            }
                        }
                        // −Γ^e_{ad} T_{..e..}
                        Var::Down => {
                            let g = gamma.get(&[e, a, t[s]]);
                            if !g.is_zero() {
                                acc.sub_assign_jet(&(g * comp));
                            }
                        }
                    }
                }
            }
            out.data[flat] = acc;
        }
        if self.weight != 0 {
            let default_theta;
            let theta = match theta {
                Some(t) => t,
                None => {
                    default_theta = coordinate_density_form(gamma)?;
                    &default_theta
                }
            };
            let w = F::from_i64(self.weight as i64);
            for (flat, idx) in multi_indices(n, rank + 1).enumerate() {
                let term = (theta.get(&[idx[0]]) * &self.data[flat % self.data.len()]).scale(&w);
                out.data[flat].add_assign_jet(&term);
            }
        }
        out.weight = self.weight;
        Ok(out)
    }

    /// Hodge-type dual against the coordinate symbol: the down slots `group`
    /// (antisymmetric, `k` of them) are replaced by `n − k` leading up slots,
    /// `(⋆α)^{b₁…b_{n−k}}{}_{…} = ε^{b₁…b_{n−k}a₁…a_k} α_{a₁…a_k…}`.
    /// No factorial normalisation is applied, so `⋆` of the all-lower symbol
    /// `ε` is `n!`; the output carries one factor of `ΛⁿT*M ≅ E(−(n+1))`, so the
    /// weight tag drops by `n + 1`.
    pub fn hodge_dual(&self, group: &[usize]) -> Result<Self> {
        self.check_group(group)?;
        if group.iter().any(|&s| self.slots[s] != Var::Down) {
            return Err(Error::VarianceMismatch("hodge_dual needs lower slots".into()));
        }
        let (n, k) = (self.n, group.len());
        if k > n {
            return Err(Error::InvalidSlot(format!("{k} slots exceed dimension {n}")));
        }
        let rest: Vec<usize> = (0..self.rank()).filter(|s| !group.contains(s)).collect();
        let mut slots = vec![Var::Up; n - k];
        slots.extend(rest.iter().map(|&s| self.slots[s]));
        let order = self.order();
        let perms = permutations(k);
        let mut src = vec![0; self.rank()];
        let data = multi_indices(n, slots.len())
            .map(|idx| {
                let mut acc = Jet::zero(n, order);
                let b = &idx[..n - k];
                if permutation_sign(b) == 0 {
                    return acc;
                }
                for (i, &s) in rest.iter().enumerate() {
                    src[s] = idx[n - k + i];
                }
                // the remaining k values are the complement of b, in every order
                let comp: Vec<usize> = (0..n).filter(|v| !b.contains(v)).collect();
                for (p, _) in &perms {
                    let mut full: Vec<usize> = b.to_vec();
                    for (i, &s) in group.iter().enumerate() {
                        src[s] = comp[p[i]];
                        full.push(comp[p[i]]);
                    }
                    let sign = permutation_sign(&full);
                    let j = &self.data[self.flat_index(&src)];
                    if sign > 0 {
                        acc.add_assign_jet(j);
                    } else {
                        acc.sub_assign_jet(j);
                    }
                }
                acc
            })
            .collect();
        Ok(Tensor { n, slots, weight: self.weight - n as i32 - 1, data })
    }
}

/// Density connection form `θ_a = Γ^b_{ab}/(n+1)` of the coordinate frame.
pub fn coordinate_density_form<F: Scalar>(gamma: &Tensor<F>) -> Result<Tensor<F>> {
    let n = gamma.dim();
    let tr = gamma.contract(0, 2)?;
    Ok(tr.scale(&F::one().div_ref(&F::from_i64(n as i64 + 1))?))
}

impl<F: Scalar> PartialEq for Tensor<F> {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.slots == o.slots && self.weight == o.weight && self.data == o.data
    }
}

impl<F: Scalar> fmt::Debug for Tensor<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Tensor(n={}, slots={:?}, w={})", self.n, self.slots, self.weight)?;
        for (i, j) in self.data.iter().enumerate() {
            if !j.is_zero() {
                let idx = multi_indices(self.n, self.rank()).nth(i).unwrap();
                writeln!(f, "  {idx:?}: {j:?}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    type T = Tensor<Rational>;

    fn c(n: usize, v: i64) -> Jet<Rational> {
        Jet::constant(n, 0, Rational::integer(v))
    }

    fn random_tensor(n: usize, slots: Vec<Var>, vals: &[i64]) -> T {
        let mut i = 0;
        T::from_fn(n, slots, |_| {
            i += 1;
            c(n, vals[(i - 1) % vals.len()])
        })
    }

    #[test]
    fn delta_product_has_kronecker_components() {
        let d = T::delta(2, 0);
        let dd = d.product(&d).unwrap();
        for idx in multi_indices(2, 4) {
            let want = ((idx[0] == idx[1]) && (idx[2] == idx[3])) as i64;
            assert_eq!(*dd.at(&idx), Rational::integer(want));
        }
        assert!(T::zeros(2, vec![Var::Up], 0).product(&d).unwrap().is_zero());
    }

    #[test]
    fn trace_of_delta_is_dimension() {
        let t = T::delta(4, 0).contract(0, 1).unwrap();
        assert_eq!(*t.at(&[]), Rational::integer(4));
        assert!(T::delta(4, 0).contract(1, 0).is_err());
    }

    #[test]
    fn dot_product_via_contraction() {
        let u = random_tensor(3, vec![Var::Down], &[2, -1, 5]);
        let v = random_tensor(3, vec![Var::Up], &[3, 7, -4]);
        let uv = u.product(&v).unwrap().contract(1, 0).unwrap();
        assert_eq!(*uv.at(&[]), Rational::integer(6 - 7 - 20));
        let direct = u.contract_with(0, &v, 0).unwrap();
        assert_eq!(direct, uv);
    }

    #[test]
    fn alternation_uses_unit_weight() {
        let mut t = T::zeros(2, vec![Var::Down, Var::Down], 0);
        t.set(&[0, 1], c(2, 1));
        let a = t.alternate(&[0, 1]).unwrap();
        assert_eq!(*a.at(&[0, 1]), Rational::new(1, 2));
        assert_eq!(*a.at(&[1, 0]), Rational::new(-1, 2));
        let s = t.symmetrize(&[0, 1]).unwrap();
        assert!(s.alternate(&[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn delta_times_symmetric_vanishes_under_triple_alternation() {
        // δ^c_a S_{bd} alternated over a, b, d is zero for symmetric S
        let s = random_tensor(3, vec![Var::Down, Var::Down], &[1, 2, 3, 2, 5, 6, 3, 6, 9]);
        let ds = T::delta(3, 0).product(&s).unwrap(); // slots c a b d
        assert!(ds.alternate(&[1, 2, 3]).unwrap().is_zero());
    }

    #[test]
    fn hodge_dual_conventions() {
        for n in 2..=4 {
            let eps = T::levi_civita_symbol(n, Var::Down, 0);
            let all: Vec<usize> = (0..n).collect();
            let d = eps.hodge_dual(&all).unwrap();
            assert_eq!(*d.at(&[]), factorial::<Rational>(n));
        }
        // n = 3: ⋆⋆α = 2α for a 1-form with the unnormalised convention
        let a = random_tensor(3, vec![Var::Down], &[4, -3, 7]);
        let da = a.hodge_dual(&[0]).unwrap(); // up, up
        let lowered = da.map(|j| j.clone());
        let two_form = T::from_data(3, vec![Var::Down, Var::Down], lowered.data().to_vec());
        let dda = two_form.hodge_dual(&[0, 1]).unwrap();
        for i in 0..3 {
            assert_eq!(*dda.at(&[i]), a.at(&[i]).mul_ref(&Rational::integer(2)));
        }
        assert!(T::zeros(3, vec![Var::Down, Var::Down], 0).hodge_dual(&[0, 1]).unwrap().is_zero());
    }

    #[test]
    fn covariant_derivative_of_delta_vanishes() {
        let n = 2;
        let x = Jet::<Rational>::variable(n, 2, 0, Rational::integer(1));
        let gamma = T::from_fn(n, vec![Var::Up, Var::Down, Var::Down], |i| {
            if i[1] == i[2] { &x * &x } else { x.scale(&Rational::integer(i[0] as i64 + 1)) }
        });
        let d = T::delta(n, 2).covariant_derivative(&gamma, None).unwrap();
        assert!(d.is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn alternation_is_idempotent(vals in proptest::collection::vec(-5i64..5, 27)) {
            let t = random_tensor(3, vec![Var::Down; 3], &vals);
            let a = t.alternate(&[0, 1, 2]).unwrap();
            prop_assert_eq!(a.alternate(&[0, 1, 2]).unwrap(), a.clone());
            prop_assert!(a.symmetrize(&[0, 2]).unwrap().is_zero());
        }

        #[test]
        fn permute_round_trips(vals in proptest::collection::vec(-5i64..5, 27)) {
            let t = random_tensor(3, vec![Var::Down, Var::Up, Var::Down], &vals);
            let p = t.permute(&[2, 0, 1]).unwrap();
            prop_assert_eq!(p.permute(&[1, 2, 0]).unwrap(), t);
        }
    }
}
