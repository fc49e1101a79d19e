//! Matrix algebra over jets and scalars: determinants, adjugates, left
//! inverses of the flattened Weyl map, ranks and minors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tensor::{multi_indices, Tensor, Var};

pub type JetMatrix<F> = Vec<Vec<Jet<F>>>;

fn jet_order<F: Scalar>(m: &JetMatrix<F>) -> usize {
    m.iter().flatten().map(Jet::order).min().unwrap_or(0)
}

pub fn identity<F: Scalar>(nvars: usize, size: usize, order: usize) -> JetMatrix<F> {
    (0..size)
        .map(|i| {
            (0..size).map(|j| Jet::constant(nvars, order, if i == j { F::one() } else { F::zero() })).collect()
        })
        .collect()
}

pub fn matmul<F: Scalar>(a: &JetMatrix<F>, b: &JetMatrix<F>) -> JetMatrix<F> {
    let inner = b.len();
    assert!(a.iter().all(|r| r.len() == inner), "matmul shape mismatch");
    let cols = b.first().map_or(0, Vec::len);
    let nvars = a[0][0].nvars();
    let order = jet_order(a).min(jet_order(b));
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = Jet::zero(nvars, order);
                    for (k, x) in row.iter().enumerate() {
                        let y = &b[k][j];
                        if !x.is_zero() && !y.is_zero() {
                            acc.mul_acc(x, y);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<F: Scalar>(a: &JetMatrix<F>) -> JetMatrix<F> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Square matrix of jets tagged with a density weight.
#[derive(Clone, Debug, PartialEq)]
pub struct EndomorphismDensity<F: Scalar> {
    pub m: JetMatrix<F>,
    pub weight: i32,
}

impl<F: Scalar> EndomorphismDensity<F> {
    pub fn new(m: JetMatrix<F>, weight: i32) -> Result<Self> {
        if m.iter().any(|r| r.len() != m.len()) || m.is_empty() {
            return Err(Error::DimensionMismatch("endomorphism must be square and nonempty".into()));
        }
        Ok(EndomorphismDensity { m, weight })
    }

    pub fn size(&self) -> usize {
        self.m.len()
    }

    /// Determinant (weight `size·w`) and adjugate (weight `(size−1)·w`).
    ///
    /// Faddeev–LeVerrier: only integer divisions occur, so this runs over
    /// jets without requiring an invertible matrix.
    pub fn det_adj(&self) -> Result<(Jet<F>, EndomorphismDensity<F>)> {
        let s = self.size();
        let nvars = self.m[0][0].nvars();
        let order = jet_order(&self.m);
        let mut mk: JetMatrix<F> = vec![vec![Jet::zero(nvars, order); s]; s];
        let mut c = Jet::constant(nvars, order, F::one()); // c_{s}
        for k in 1..=s {
            // M_k = A M_{k−1} + c_{s−k+1} I
            let mut next = matmul(&self.m, &mk);
            for (i, row) in next.iter_mut().enumerate() {
                row[i].add_assign_jet(&c);
            }
            mk = next;
            let am = matmul(&self.m, &mk);
            let mut tr = Jet::zero(nvars, order);
            for (i, row) in am.iter().enumerate() {
                tr.add_assign_jet(&row[i]);
            }
            let kk = F::from_i64(-(k as i64));
            c = tr.map(|x| x.div_ref(&kk).expect("nonzero integer"));
        }
        // c is now c_0; det = (−1)^s c_0, adj = (−1)^{s−1} M_s
        let det = if s % 2 == 0 { c } else { c.neg_jet() };
        let adj = if s % 2 == 1 { mk } else { mk.iter().map(|r| r.iter().map(Jet::neg_jet).collect()).collect() };
        Ok((det, EndomorphismDensity { m: adj, weight: (s as i32 - 1) * self.weight }))
    }
}

/// Determinant of a scalar matrix by fraction-free-safe Gaussian elimination.
pub fn det_scalar<F: Scalar>(m: &[Vec<F>]) -> F {
    let s = m.len();
    let mut a: Vec<Vec<F>> = m.to_vec();
    let mut det = F::one();
    for col in 0..s {
        let piv = if F::EXACT {
            (col..s).find(|&r| !a[r][col].is_zero())
        } else {
            (col..s)
                .max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))
                .filter(|&r| !a[r][col].is_zero())
        };
        let Some(p) = piv else { return F::zero() };
        if p != col {
            a.swap(p, col);
            det = det.neg_ref();
        }
        det = det.mul_ref(&a[col][col]);
        for r in col + 1..s {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].div_ref(&a[col][col]).expect("nonzero pivot");
            for c in col..s {
                let t = f.mul_ref(&a[col][c]);
                a[r][c].sub_assign_ref(&t);
            }
        }
    }
    det
}

/// Rank of a scalar matrix; on the float ring entries below
/// `tol · max|entry|` count as zero.
pub fn rank<F: Scalar>(m: &[Vec<F>], tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<F>> = m.to_vec();
    let scale = a.iter().flatten().map(Scalar::magnitude).fold(0.0, f64::max);
    let mut r = 0;
    for col in 0..cols {
        if r == a.len() {
            break;
        }
        let piv = (r..a.len())
            .max_by(|&x, &y| a[x][col].magnitude().total_cmp(&a[y][col].magnitude()))
            .filter(|&p| !a[p][col].negligible(scale, tol));
        let Some(p) = piv else { continue };
        a.swap(p, r);
        for row in r + 1..a.len() {
            if a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].div_ref(&a[r][col]).expect("nonzero pivot");
            for c in col..cols {
                let t = f.mul_ref(&a[r][c]);
                a[row][c].sub_assign_ref(&t);
            }
        }
        r += 1;
    }
    r
}

/// Singular values (descending) of a scalar matrix, in f64.
pub fn singular_values<F: Scalar>(m: &[Vec<F>]) -> Vec<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let dm = DMatrix::from_fn(rows, cols, |i, j| m[i][j].to_f64());
    let mut sv: Vec<f64> = dm.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Base-point values of a jet matrix.
pub fn values<F: Scalar>(m: &JetMatrix<F>) -> Vec<Vec<F>> {
    m.iter().map(|r| r.iter().map(|j| j.value().clone()).collect()).collect()
}

/// All `r × r` minors of an `r × c` scalar matrix, columns in lexicographic
/// order.
pub fn maximal_minors<F: Scalar>(m: &[Vec<F>]) -> Vec<F> {
    let r = m.len();
    let c = m.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut cols: Vec<usize> = (0..r).collect();
    if r > c {
        return out;
    }
    loop {
        let sub: Vec<Vec<F>> = m.iter().map(|row| cols.iter().map(|&j| row[j].clone()).collect()).collect();
        out.push(det_scalar(&sub));
        // next combination
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cols[i] < c - r + i {
                cols[i] += 1;
                for k in i + 1..r {
                    cols[k] = cols[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Number of maximal minors, saturating.
pub fn binomial(c: usize, r: usize) -> u128 {
    if r > c {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..r as u128 {
        acc = acc.saturating_mul(c as u128 - i) / (i + 1);
    }
    acc
}

/// Outcome of the weak-genericity test at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericityMargin {
    /// Rank of the n³ × n flattening at the base point.
    pub rank: usize,
    /// Smallest over largest singular value of the flattening.
    pub margin: f64,
    pub ok: bool,
}

/// `A[(i,j,k), l] = W_{ij}{}^l{}_k`, an `n³ × n` jet matrix.
pub fn flatten_weyl<F: Scalar>(w: &Tensor<F>) -> Result<JetMatrix<F>> {
    check_weyl_slots(w)?;
    let n = w.dim();
    Ok(multi_indices(n, 3).map(|t| (0..n).map(|l| w.get(&[t[0], t[1], l, t[2]]).clone()).collect()).collect())
}

fn check_weyl_slots<F: Scalar>(w: &Tensor<F>) -> Result<()> {
    if w.slots() != [Var::Down, Var::Down, Var::Up, Var::Down] {
        return Err(Error::VarianceMismatch(format!("expected W-type slots, got {:?}", w.slots())));
    }
    Ok(())
}

/// Rank (exact) and singular-value margin of the Weyl flattening at the base point.
pub fn weyl_genericity<F: Scalar>(w: &Tensor<F>, tol: f64) -> Result<GenericityMargin> {
    let a = values(&flatten_weyl(w)?);
    let n = w.dim();
    let rk = rank(&a, tol);
    let sv = singular_values(&a);
    let margin = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    };
    let ok = if F::EXACT { rk == n } else { rk == n && margin >= tol };
    Ok(GenericityMargin { rank: rk, margin, ok })
}

/// Left inverse `D^{ij}{}_m{}^k` of the Weyl map `Υ_l ↦ W_{ij}{}^l{}_kΥ_l`.
///
/// Solves the normal equations `D = (BᵀA)⁻¹Bᵀ` with `A` the flattening and
/// `B = A` (Euclidean) or, when `g_inv` is given, `B` the flattening with all
/// three lower indices raised by `g_inv`. Jet orders propagate through the
/// same formula, so derivatives of `D` are exact.
pub fn left_inverse_flat<F: Scalar>(w: &Tensor<F>, g_inv: Option<&Tensor<F>>, tol: f64) -> Result<Tensor<F>> {
    let n = w.dim();
    let gm = weyl_genericity(w, tol)?;
    if !gm.ok {
        return Err(Error::GenericityFailure(format!("Weyl map has rank {} < {n} (margin {:.3e})", gm.rank, gm.margin)));
    }
    let a = flatten_weyl(w)?;
    let b = match g_inv {
        None => a.clone(),
        Some(gi) => {
            // B^{ij l k} = g^{ii'} g^{jj'} g^{kk'} W_{i'j'}^l_{k'}
            let t = gi.contract_with(1, w, 0)?; // i, [j' l k']
            let t = gi.contract_with(1, &t, 1)?; // j, i, l, k'
            let t = gi.contract_with(1, &t, 3)?; // k, j, i, l
            multi_indices(n, 3).map(|ix| (0..n).map(|l| t.get(&[ix[2], ix[1], ix[0], l]).clone()).collect()).collect()
        }
    };
    let bt = transpose(&b);
    let normal = EndomorphismDensity::new(matmul(&bt, &a), 0)?;
    let (det, adj) = normal.det_adj()?;
    if det.value().is_zero() {
        return Err(Error::GenericityFailure("normal equations are singular".into()));
    }
    let inv_det = det.recip()?;
    let dm = matmul(&adj.m, &bt); // n × n³
    let mut d = Tensor::zeros(n, vec![Var::Up, Var::Up, Var::Down, Var::Up], 0);
    for (row, t) in multi_indices(n, 3).enumerate() {
        for m in 0..n {
            d.set(&[t[0], t[1], m, t[2]], dm[m][row].mul_jet(&inv_det));
        }
    }
    Ok(d)
}

/// `D^{ij}{}_m{}^k W_{ij}{}^l{}_k`, which is `δ_m^l` for a left inverse.
pub fn apply_left_inverse<F: Scalar>(d: &Tensor<F>, w: &Tensor<F>) -> Result<Tensor<F>> {
    // slots of D: i j m k ; of W: i j l k → result [m, l]
    let t = d.contract_many(w, &[(0, 0), (1, 1), (3, 3)])?;
    // t slots: m (Down), l (Up) → reorder to [l, m] = δ^l_m
    t.permute(&[1, 0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(v: i64) -> Rational {
        Rational::integer(v)
    }

    fn const_matrix(vals: &[Vec<i64>]) -> JetMatrix<Rational> {
        vals.iter().map(|r| r.iter().map(|&v| Jet::constant(1, 0, q(v))).collect()).collect()
    }

    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        if m.len() == 1 {
            return m[0][0].clone();
        }
        let mut acc = Rational::zero();
        for j in 0..m.len() {
            let minor: Vec<Vec<Rational>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect()).collect();
            let t = m[0][j].mul_ref(&cofactor_det(&minor));
            acc = if j % 2 == 0 { acc.add_ref(&t) } else { acc.sub_ref(&t) };
        }
        acc
    }

    #[test]
    fn det_adj_of_identity_and_diagonal() {
        let (d, adj) = EndomorphismDensity::new(identity::<Rational>(1, 3, 0), 0).unwrap().det_adj().unwrap();
        assert_eq!(*d.value(), q(1));
        assert_eq!(adj.m, identity::<Rational>(1, 3, 0));
        let (d, adj) = EndomorphismDensity::new(const_matrix(&[vec![2, 0], vec![0, 3]]), 1).unwrap().det_adj().unwrap();
        assert_eq!(*d.value(), q(6));
        assert_eq!(adj.m, const_matrix(&[vec![3, 0], vec![0, 2]]));
        assert_eq!(adj.weight, 1);
    }

    #[test]
    fn det_adj_matches_cofactor_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let vals: Vec<Vec<i64>> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            let m = const_matrix(&vals);
            let (d, adj) = EndomorphismDensity::new(m.clone(), 0).unwrap().det_adj().unwrap();
            let scal: Vec<Vec<Rational>> = vals.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
            assert_eq!(*d.value(), cofactor_det(&scal));
            assert_eq!(*d.value(), det_scalar(&scal));
            let prod = matmul(&m, &adj.m);
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { d.value().clone() } else { q(0) };
                    assert_eq!(*prod[i][j].value(), want);
                }
            }
        }
    }

    #[test]
    fn det_adj_on_jets_satisfies_adjugate_identity() {
        let x = Jet::<Rational>::variable(2, 3, 0, q(1));
        let y = Jet::<Rational>::variable(2, 3, 1, q(-2));
        let m = vec![vec![&x * &y, x.clone(), y.clone()], vec![y.clone(), &x * &x, Jet::constant(2, 3, q(3))], vec![
            x.clone(),
            Jet::constant(2, 3, q(1)),
            &y * &y,
        ]];
        let (d, adj) = EndomorphismDensity::new(m.clone(), 0).unwrap().det_adj().unwrap();
        let prod = matmul(&m, &adj.m);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { d.clone() } else { Jet::zero(2, 3) };
                assert_eq!(prod[i][j], want);
            }
        }
    }

    #[test]
    fn rank_and_minors() {
        let m: Vec<Vec<Rational>> = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        assert_eq!(rank(&m, 0.0), 1);
        assert!(maximal_minors(&m).iter().all(Rational::is_zero));
        let id: Vec<Vec<Rational>> = vec![vec![q(1), q(0)], vec![q(0), q(1)]];
        assert_eq!(maximal_minors(&id), vec![q(1)]);
        assert_eq!(binomial(60, 10), 75_394_027_566);
        assert_eq!(maximal_minors(&vec![vec![q(1), q(2), q(5)]]).len(), 3);
    }

    #[test]
    fn zero_weyl_is_not_generic() {
        let w = Tensor::<Rational>::zeros(3, vec![Var::Down, Var::Down, Var::Up, Var::Down], 0);
        assert!(matches!(left_inverse_flat(&w, None, 0.0), Err(Error::GenericityFailure(_))));
    }
}
