use projein::conformal::{
    compare_weyl, conformal_connection_change, conformal_decompose, iota_checks, projective_cotractor,
    schouten_halving_check, MetricJets,
};
use projein::connection::{builtin, random_polynomial, MetricSource};
use projein::expr::Expr;
use projein::linalg::left_inverse_flat;
use projein::projective::ProjectiveCurvature;
use projein::scalar::Rational;
use projein::{Tensor, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn random_cotractors(n: usize, p: &[Rational], count: usize, seed: u64) -> Vec<projein::tractor::TractorSection<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mu = (0..n).map(|_| random_polynomial(n, 2, &mut rng).eval(p, 2).unwrap()).collect();
            let sigma = random_polynomial(n, 2, &mut rng).eval(p, 2).unwrap();
            projective_cotractor(Tensor::from_data(n, vec![Var::Down], mu), sigma).unwrap()
        })
        .collect()
}

#[test]
fn s2xs2_bridge_identities_are_exact() {
    let b = builtin("s2xs2", None).unwrap();
    let m = b.source.metric().unwrap();
    let lambda = b.einstein_lambda.clone().unwrap();
    for p in [[q("1/2"), q("1/4"), q("-1/3"), q("0")], [q("-1"), q("3/4"), q("1/8"), q("5/7")]] {
        let mj = MetricJets::at(m, &p, 2).unwrap();
        assert!(compare_weyl(&mj).unwrap().is_zero());
        let (half, ein) = schouten_halving_check(&mj, Some(&lambda)).unwrap();
        assert!(half.is_zero() && ein.unwrap().is_zero());
        let report = iota_checks(&mj, &lambda, &random_cotractors(4, &p, 3, 5)).unwrap();
        assert!(report.is_zero(), "{}", report.max_abs());
    }
}

#[test]
fn three_sphere_has_no_weyl_curvature() {
    let m = builtin("sphere", Some(3)).unwrap().source.metric().unwrap().clone();
    let mj = MetricJets::at(&m, &[q("1/3"), q("1/2"), q("-1/4")], 2).unwrap();
    assert!(ProjectiveCurvature::of_connection(&mj.gamma).unwrap().w.is_zero());
    assert!(conformal_decompose(&mj).unwrap().w.is_zero());
}

fn diagonal_polynomial_metric() -> MetricSource {
    // 1 + x1², 2 + x2 x3, 1 + x1 x3/2, 3
    let parse = |s: &str| Expr::parse(s, 4).unwrap();
    MetricSource::diagonal(vec![parse("1 + x1^2"), parse("2 + x2*x3"), parse("1 + x1*x3/2"), parse("3")]).unwrap()
}

#[test]
fn non_einstein_metric_weyl_differs() {
    let m = diagonal_polynomial_metric();
    let mj = MetricJets::at(&m, &[q("1/2"), q("1/3"), q("1/5"), q("0")], 2).unwrap();
    assert!(!compare_weyl(&mj).unwrap().is_zero());
}

#[test]
fn weyl_is_conformally_invariant() {
    let m = diagonal_polynomial_metric();
    let omega = Expr::parse("1 + x1*x2/3 + x4^2/5", 4).unwrap();
    let omega_sq = Expr::pow(omega.clone(), 2);
    let scaled = MetricSource::diagonal(
        (0..4).map(|i| Expr::mul(omega_sq.clone(), m.entries()[i * 4 + i].clone())).collect(),
    )
    .unwrap();
    let p = [q("1/2"), q("-1/3"), q("1/5"), q("1/7")];
    let a = conformal_decompose(&MetricJets::at(&m, &p, 2).unwrap()).unwrap();
    let b = conformal_decompose(&MetricJets::at(&scaled, &p, 2).unwrap()).unwrap();
    assert_eq!(a.weyl_mixed().unwrap(), b.weyl_mixed().unwrap());

    // Levi-Civita of Ω²g from that of g
    let mj = MetricJets::at(&m, &p, 2).unwrap();
    let upsilon: Vec<_> = (0..4)
        .map(|v| Expr::div(omega.derivative(v), omega.clone()).eval(&p, 2).unwrap())
        .collect();
    let predicted = conformal_connection_change(&mj, &Tensor::from_data(4, vec![Var::Down], upsilon)).unwrap();
    assert_eq!(predicted, scaled.levi_civita(&p, 2).unwrap());
}

#[test]
fn schwarzschild_dim4_identity_and_metric_left_inverse() {
    let m = builtin("schwarzschild", None).unwrap().source.metric().unwrap().clone();
    let p = [0.25, 4.0, 0.125, 0.5];
    let mj = MetricJets::<f64>::at(&m, &p, 2).unwrap();
    let cc = conformal_decompose(&mj).unwrap();
    let scale = cc.r.max_abs_value();
    let norm = *cc.weyl_norm_sq().unwrap().value();
    assert!(cc.dim4_identity_residual().unwrap().truncate(0).negligible(scale * scale, 1e-8));
    assert!(compare_weyl(&mj).unwrap().truncate(0).negligible(scale, 1e-8));
    // metric-weighted normal equations give D = (4/|W|²) W^{ij}{}_m{}^k
    let w = ProjectiveCurvature::of_connection(&mj.gamma).unwrap().w.truncate(0);
    let g_inv = mj.g_inv.truncate(0);
    let d = left_inverse_flat(&w, Some(&g_inv), 1e-10).unwrap();
    let wl = cc.w.truncate(0);
    let expected = Tensor::<f64>::from_fn(4, vec![Var::Up, Var::Up, Var::Down, Var::Up], |ix| {
        let (i, j, mm, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    acc += g_inv.at(&[i, a]) * g_inv.at(&[j, b]) * g_inv.at(&[k, c]) * wl.at(&[a, b, mm, c]);
                }
            }
        }
        projein::Jet::constant(4, 0, 4.0 * acc / norm)
    });
    assert!(d.sub(&expected).unwrap().negligible(d.max_abs_value(), 1e-8), "{:?}", d.sub(&expected).unwrap().max_abs());
}
