use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levilab::disc::{hausdorff_distance, AnalyticDisc, HarmonicDisc};
use levilab::domain::{parse_catalog_uri, Membership};
use levilab::expr::{curve_jet, forward_difference, Expr, PolyCurve, TPoly, Tape};
use levilab::finite_type::{types_agree, TypeValue};
use levilab::linalg::{cmatvec, random_unitary, to_complex, to_real};

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

/// Smooth expressions in `x0, x1` built from a fixed menu of terms.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0usize..2).prop_map(Expr::var), (-2.0f64..2.0).prop_map(Expr::constant),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (1.0 + b.powi(2))),
            inner.clone().prop_map(|a| (1.0 + a.powi(2)).ln()),
            inner.clone().prop_map(|a| (0.3 * a).exp()),
            inner.prop_map(|a| (2.0 + a.powi(2)).sqrt()),
        ]
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tape_matches_tree(e in expr(), x in point(2)) {
        let tree = e.eval(&x).unwrap();
        let tape = Tape::compile(std::slice::from_ref(&e), 2).unwrap().eval(&x).unwrap()[0];
        prop_assert!((tree - tape).abs() <= 1e-12 * (1.0 + tree.abs()));
    }

    #[test]
    fn first_order_jet_is_gradient(e in expr(), x in point(2)) {
        let inputs: Vec<TPoly> = (0..2).map(|v| TPoly::variable(2, 2, v, x[v])).collect();
        let jet = e.taylor(&inputs).unwrap();
        prop_assert!((jet.value() - e.eval(&x).unwrap()).abs() <= 1e-12 * (1.0 + jet.value().abs()));
        for (v, exps) in [[1u8, 0], [0, 1]].iter().enumerate() {
            let d = e.diff(v).eval(&x).unwrap();
            prop_assert!((jet.coeff(exps) - d).abs() <= 1e-10 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn second_order_jet_is_half_hessian(e in expr(), x in point(2)) {
        let inputs: Vec<TPoly> = (0..2).map(|v| TPoly::variable(2, 2, v, x[v])).collect();
        let jet = e.taylor(&inputs).unwrap();
        let dxx = e.diff(0).diff(0).eval(&x).unwrap();
        let dxy = e.diff(0).diff(1).eval(&x).unwrap();
        prop_assert!((2.0 * jet.coeff(&[2, 0]) - dxx).abs() <= 1e-9 * (1.0 + dxx.abs()));
        prop_assert!((jet.coeff(&[1, 1]) - dxy).abs() <= 1e-9 * (1.0 + dxy.abs()));
    }

    #[test]
    fn mixed_partials_commute(e in expr(), x in point(2)) {
        let a = e.diff(0).diff(1).eval(&x).unwrap();
        let b = e.diff(1).diff(0).eval(&x).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn curve_jet_matches_polynomial_composition(
        terms in prop::collection::vec((-3.0f64..3.0, 0u32..3, 0u32..3), 1..6),
        curve in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 3),
    ) {
        // e = sum c x0^a x1^b, gamma(t) = sum_k curve[k] t^k
        let mut e = Expr::zero();
        for &(c, a, b) in &terms {
            e = e + c * Expr::var(0).powi(a as i32) * Expr::var(1).powi(b as i32);
        }
        let comp: Vec<Vec<f64>> = (0..2).map(|i| curve.iter().map(|ck| ck[i]).collect()).collect();
        let mut want = vec![0.0; 13];
        for &(c, a, b) in &terms {
            let mut p = vec![c];
            for _ in 0..a {
                p = poly_mul(&p, &comp[0]);
            }
            for _ in 0..b {
                p = poly_mul(&p, &comp[1]);
            }
            want.iter_mut().zip(&p).for_each(|(w, q)| *w += q);
        }
        let jet = curve_jet(&e, &PolyCurve::new(curve.clone()), 12).unwrap();
        for (k, (got, w)) in jet.coeffs.iter().zip(&want).enumerate() {
            prop_assert!((got - w).abs() <= 1e-10 * (1.0 + w.abs()), "order {k}: {got} vs {w}");
        }
    }

    #[test]
    fn wirtinger_identities(e in expr(), x in point(2)) {
        let (zr, zi) = e.wirtinger(0, false);
        let (br, bi) = e.wirtinger(0, true);
        let ev = |f: &Expr| f.eval(&x).unwrap();
        let dx = ev(&e.diff(0));
        let dy = ev(&e.diff(1));
        // d/dz + d/dzbar = d/dx and i (d/dz - d/dzbar) = d/dy
        prop_assert!((ev(&zr) + ev(&br) - dx).abs() <= 1e-12 * (1.0 + dx.abs()));
        prop_assert!((ev(&zi) + ev(&bi)).abs() <= 1e-12 * (1.0 + dy.abs()));
        prop_assert!((-(ev(&zi) - ev(&bi)) - dy).abs() <= 1e-12 * (1.0 + dy.abs()));
        prop_assert!((ev(&zr) - ev(&br)).abs() <= 1e-12 * (1.0 + dx.abs()));
    }

    #[test]
    fn difference_is_linear(a in -3.0f64..3.0, x in -1.0f64..1.0, h in 1e-3f64..0.5, j in 1usize..5) {
        let f = |t: f64| Ok(t.sin());
        let g = |t: f64| Ok(t.powi(4));
        let sum = forward_difference(|t| Ok(a * f(t)? + g(t)?), x, h, j).unwrap();
        let parts = a * forward_difference(f, x, h, j).unwrap() + forward_difference(g, x, h, j).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-12 * (1.0 + parts.abs()));
    }

    #[test]
    fn polynomial_differences_vanish_above_degree(x in -2.0f64..2.0, h in 0.01f64..1.0) {
        let cubic = |t: f64| Ok(2.0 * t.powi(3) - t + 5.0);
        let d4 = forward_difference(cubic, x, h, 4).unwrap();
        prop_assert!(d4.abs() <= 1e-10);
    }

    #[test]
    fn ball_membership_is_unitarily_invariant(seed in any::<u64>(), x in point(4)) {
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        let u = random_unitary(2, &mut ChaCha8Rng::seed_from_u64(seed));
        let image = ball.unitary_image(&u).unwrap();
        let ux = to_real(&cmatvec(&u, &to_complex(&x)));
        let r = x.iter().map(|a| a * a).sum::<f64>();
        prop_assume!((r - 1.0).abs() > 1e-6);
        prop_assert_eq!(ball.membership(&x).unwrap(), image.membership(&ux).unwrap());
    }

    #[test]
    fn rescaling_keeps_membership(x in point(4), a in 0.1f64..3.0) {
        let spec = parse_catalog_uri("catalog:model_type_2k?k=2").unwrap();
        let scaled = spec.rescaled(&(a + Expr::abs_sq_z(1))).unwrap();
        let level = spec.level(&x).unwrap();
        prop_assume!(level.abs() > 1e-6);
        prop_assert_eq!(spec.membership(&x).unwrap(), scaled.membership(&x).unwrap());
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec(point(3), 1..12),
        b in prop::collection::vec(point(3), 1..12),
        c in prop::collection::vec(point(3), 1..12),
    ) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        let via = hausdorff_distance(&a, &c).unwrap() + hausdorff_distance(&c, &b).unwrap();
        prop_assert!(ab <= via + 1e-12);
        // never below the one-sided distance from a to b
        let one_sided = a
            .iter()
            .map(|p| b.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        prop_assert!(ab >= one_sided - 1e-12);
    }

    #[test]
    fn harmonic_centre_of_a_circle(r in 0.1f64..3.0, cx in -2.0f64..2.0, k in 64usize..512) {
        let samples: Vec<Vec<Complex64>> = (0..k)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                vec![Complex64::new(cx, 0.0) + Complex64::from_polar(r, t)]
            })
            .collect();
        let hd = HarmonicDisc::from_samples(samples).unwrap();
        prop_assert!((hd.center()[0] - Complex64::new(cx, 0.0)).norm() <= 1e-12 * (1.0 + cx.abs() + r));
    }

    #[test]
    fn disc_json_round_trip(re in prop::collection::vec(-1.0f64..1.0, 6), im in prop::collection::vec(-1.0f64..1.0, 6)) {
        let coeffs: Vec<Vec<Complex64>> = (0..3)
            .map(|d| (0..2).map(|j| Complex64::new(re[2 * d + j], im[2 * d + j])).collect())
            .collect();
        let disc = AnalyticDisc::new(coeffs).unwrap();
        let back = AnalyticDisc::from_json(&serde_json::to_string(&disc).unwrap()).unwrap();
        prop_assert_eq!(back, disc);
    }

    #[test]
    fn type_value_round_trip(order in 1usize..40, saturated in any::<bool>()) {
        let v = if saturated { TypeValue::saturated(order) } else { TypeValue::exact(order) };
        let back: TypeValue = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
        prop_assert!(types_agree(v, v));
    }
}

#[test]
fn membership_labels_cover_the_ball() {
    let ball = parse_catalog_uri("catalog:ball").unwrap();
    assert_eq!(ball.membership(&[0.0; 4]).unwrap(), Membership::Interior);
    assert_eq!(ball.membership(&[1.0, 0.0, 0.0, 0.0]).unwrap(), Membership::Boundary);
    assert_eq!(ball.membership(&[1.0, 1.0, 0.0, 0.0]).unwrap(), Membership::Exterior);
}
