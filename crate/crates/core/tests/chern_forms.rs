use projein::connection::{builtin, check_weyl_algebra, random_polynomial_connection, ConnectionField, ConnectionSource, OneFormField};
use projein::expr::Expr;
use projein::obstructions::{
    bruteforce_form, increasing_tuples, omega_b_curvature, p_form, p_form_of_scale_connection, q_form,
    wedge_power_component,
};
use projein::projective::{cotton, ProjectiveCurvature};
use projein::scalar::{factorial, Rational};
use projein::tractor::tractor_curvature;
use projein::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Random connection moved to trace-free Christoffel symbols, hence β = 0.
fn random_scale_connection(n: usize, seed: u64) -> ConnectionField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = random_polynomial_connection(n, 2, &mut rng);
    let ConnectionSource::Christoffel { gamma, .. } = &src else { unreachable!() };
    let scale = Expr::constant(Rational::new(-1, n as i64 + 1));
    let shift = (0..n)
        .map(|a| {
            let tr = (0..n).fold(Expr::constant(Rational::zero()), |acc, b| Expr::add(acc, gamma[b * n * n + a * n + b].clone()));
            Expr::mul(scale.clone(), tr)
        })
        .collect();
    ConnectionField::shifted(src, OneFormField { components: shift }).unwrap()
}

#[test]
fn r_and_w_forms_agree_for_scale_connections() {
    let p = vec![q("1/2"), q("-1/3"), q("1/5"), q("2/7")];
    for seed in 0..3 {
        let field = random_scale_connection(4, seed);
        let gamma = field.christoffel_jet(&p, 2).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        assert!(pc.beta.is_zero());
        for k in 1..=2 {
            let pr = p_form_of_scale_connection(&pc, k, 0.0).unwrap();
            assert_eq!(pr, p_form(&pc.w, k).unwrap());
            assert_eq!(pr, bruteforce_form(&pc.r, k).unwrap());
        }
    }
    // non-scale input is rejected on the R path
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let gamma = random_polynomial_connection(4, 2, &mut rng).christoffel_jet(&p, 2).unwrap();
    let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
    assert!(p_form_of_scale_connection(&pc, 1, 0.0).is_err());
}

#[test]
fn tractor_forms_equal_weyl_forms() {
    let p = vec![q("1/3"), q("1/4"), q("-1/2"), q("1")];
    for seed in 10..13 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_polynomial_connection(4, 2, &mut rng).christoffel_jet(&p, 2).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        let c = cotton(&gamma, &pc.p).unwrap();
        let omega = tractor_curvature(&pc.w, &c).unwrap();
        for k in 1..=2 {
            assert_eq!(q_form(&omega, k).unwrap(), p_form(&pc.w.truncate(0), k).unwrap().truncate(0));
        }
    }
}

#[test]
fn odd_forms_vanish_for_levi_civita() {
    let cases = [("sphere", Some(3)), ("hyperbolic", Some(2)), ("s2xs2", None), ("sphere", Some(6))];
    for (name, n) in cases {
        let b = builtin(name, n).unwrap();
        let dim = b.source.dim();
        let p: Vec<Rational> = (0..dim).map(|i| Rational::new(i as i64 + 1, 7)).collect();
        let gamma = b.source.christoffel_jet(&p, 1).unwrap();
        let pc = ProjectiveCurvature::of_connection(&gamma).unwrap();
        for k in (1..=dim / 2).filter(|k| k % 2 == 1) {
            assert!(p_form(&pc.r, k).unwrap().is_zero(), "{name} k = {k}");
        }
    }
}

fn symplectic(n: usize, pairs: usize) -> Vec<Vec<Rational>> {
    let mut om = vec![vec![Rational::zero(); n]; n];
    for i in 0..pairs {
        om[2 * i][2 * i + 1] = Rational::one();
        om[2 * i + 1][2 * i] = Rational::integer(-1);
    }
    om
}

#[test]
fn omega_b_construction_in_nine_dimensions() {
    let n = 9;
    let om = symplectic(n, 3);
    // cyclic permutation on the radical span(e7, e8, e9): tr B = 0, tr B³ = 3
    let mut b = vec![vec![Rational::zero(); n]; n];
    b[7][6] = Rational::one();
    b[8][7] = Rational::one();
    b[6][8] = Rational::one();
    let a = omega_b_curvature(&om, &b);
    check_weyl_algebra(&a).unwrap();
    let p3 = p_form(&a, 3).unwrap();
    assert!(!p3.is_zero());
    let c = Rational::integer(64).div_ref(&factorial::<Rational>(6)).unwrap().mul_ref(&Rational::integer(3));
    for t in increasing_tuples(n, 6) {
        assert_eq!(*p3.get(&t).unwrap().value(), c.mul_ref(&wedge_power_component(&om, 3, &t)), "{t:?}");
    }
}
