//! Both directions of the disc characterization of Levi pseudoconvexity,
//! checked on explicit discs. The direction "pseudoconvex implies discs with
//! boundary in the boundary stay in the closure" is the classical converse
//! and is labelled as such.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use levilab::disc::{disc_containment_test, AnalyticDisc, ContainmentVariant, DiscTestConfig};
use levilab::domain::{parse_catalog_uri, BoundaryPoint, DomainSpec};
use levilab::expr::Expr;
use levilab::forms::{classify_point, DEFAULT_TOL_EIG};
use levilab::linalg::{cmatvec, random_unitary};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg() -> DiscTestConfig {
    DiscTestConfig::default()
}

#[test]
fn negative_levi_direction_yields_an_escaping_disc() {
    // {2 Re z2 < |z1|^2} has Levi eigenvalue -1 at the origin
    let rho = 2.0 * Expr::re_z(1) - Expr::abs_sq_z(0);
    let spec = DomainSpec::from_rho("concave", 2, rho, vec![[-1.0, 1.0]; 4]).unwrap();
    let p = BoundaryPoint::at(&spec, &[0.0; 4]).unwrap();
    let forms = classify_point(&spec, &p, DEFAULT_TOL_EIG).unwrap();
    assert!(!forms.levi_pseudoconvex);
    for eps in [0.5, 0.1, 0.01] {
        // rho(eps zeta, eps^2 / 2) = eps^2 (1 - |zeta|^2)
        let disc = AnalyticDisc::linear(
            vec![c(0.0, 0.0), c(eps * eps / 2.0, 0.0)],
            vec![c(eps, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let r = disc_containment_test(&spec, &disc, ContainmentVariant::BoundaryInBoundary, &cfg()).unwrap();
        assert!(r.premise_holds, "eps={eps}");
        assert!(!r.conclusion_holds, "eps={eps}");
        assert_eq!(r.witness, Some([0.0, 0.0]));
    }
}

#[test]
fn classical_converse_on_the_ball() {
    let ball = parse_catalog_uri("catalog:ball").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        // zeta -> U (sqrt(1 - r^2), r zeta) has its boundary circle on the sphere
        let r: f64 = rng.random_range(0.05..1.0);
        let u = random_unitary(2, &mut rng);
        let centre = cmatvec(&u, &[c((1.0 - r * r).sqrt(), 0.0), c(0.0, 0.0)]);
        let dir = cmatvec(&u, &[c(0.0, 0.0), c(r, 0.0)]);
        let disc = AnalyticDisc::linear(centre, dir).unwrap();
        let res = disc_containment_test(&ball, &disc, ContainmentVariant::BoundaryInBoundary, &cfg()).unwrap();
        assert!(res.premise_holds && res.conclusion_holds, "r={r}");
    }
}

#[test]
fn classical_converse_on_the_model_domains() {
    for k in 1..=3 {
        let spec = parse_catalog_uri(&format!("catalog:model_type_2k?k={k}")).unwrap();
        for a in [0.2f64, 0.5, 0.8] {
            // rho(a zeta, -a^2k / 2) = a^2k (|zeta|^2k - 1)
            let shift = -a.powi(2 * k) / 2.0;
            let disc = AnalyticDisc::linear(vec![c(0.0, 0.0), c(shift, 0.0)], vec![c(a, 0.0), c(0.0, 0.0)]).unwrap();
            let r = disc_containment_test(&spec, &disc, ContainmentVariant::BoundaryInBoundary, &cfg()).unwrap();
            assert!(r.premise_holds && r.conclusion_holds, "k={k} a={a}");
        }
    }
}
