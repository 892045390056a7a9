//! Acceptance suite. Each criterion prints one PASS/FAIL line with its
//! measurements and wall time; the test fails if any criterion fails or
//! overruns its time limit.
//!
//! Criteria run sequentially in one process so their timings do not
//! compete for cores.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use levilab::disc::{
    disc_containment_test, kontinuitats_sequence, small_disc_search, AnalyticDisc, ContainmentVariant, DiscTestConfig,
    SequenceConfig, Verdict,
};
use levilab::domain::{parse_catalog_uri, BoundaryPoint, Membership};
use levilab::expr::{forward_difference, lipschitz_exponent, Expr};
use levilab::finite_type::{bloom_graham_check, TypeConfig, TypeValue};
use levilab::forms::{classify_point, hartogs_check, HartogsConfig, DEFAULT_TOL_EIG};
use levilab::linalg::{cmatvec, random_unitary, to_complex, to_real};
use levilab::par::Execution;
use levilab::scenarios::{axis_disc, example3, example3_closed_form, ScenarioOptions};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn harmonic_centre() -> Outcome {
    let opts = ScenarioOptions {
        eps: 0.01,
        curve_samples: 4096,
        ..Default::default()
    };
    let r = example3(&opts).unwrap();
    let centre = r.checks.iter().find(|c| c.name == "harmonic_centre").unwrap();
    let outside = r.checks.iter().find(|c| c.name == "centre_membership").unwrap();
    let expected = example3_closed_form(0.01);
    outcome(
        centre.passed && outside.passed,
        format!(
            "expected ({:.4}, {:.4}{:+.4}i), max_error {}, centre {}",
            expected[0].re, expected[1].re, expected[1].im, centre.observed["max_error"], outside.observed
        ),
    )
}

fn ball_classification() -> Outcome {
    let spec = parse_catalog_uri("catalog:ball").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut flags_ok = true;
    for _ in 0..100 {
        let v: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let x: Vec<f64> = v.iter().map(|a| a / n).collect();
        let p = BoundaryPoint::at(&spec, &x).unwrap();
        let r = classify_point(&spec, &p, DEFAULT_TOL_EIG).unwrap();
        flags_ok &= r.strictly_convex && r.strictly_pseudoconvex;
        for e in &r.levi_eigenvalues {
            worst = worst.max((e - 1.0).abs());
        }
    }
    outcome(
        flags_ok && worst <= 1e-8,
        format!("100 points strictly convex and strictly pseudoconvex: {flags_ok}, max |lambda - 1| = {worst:.1e}"),
    )
}

fn type_ladder() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let spec = parse_catalog_uri(&format!("catalog:model_type_2k?k={k}")).unwrap();
        let p = BoundaryPoint::at(&spec, &[0.0; 4]).unwrap();
        let cfg = TypeConfig {
            cutoff: 8,
            degree: 6,
            ..Default::default()
        };
        let r = bloom_graham_check(&spec, &p, &cfg).unwrap();
        let want = TypeValue::exact(2 * k);
        ok &= r.geometric_type == want && r.commutator_type == want && r.agree;
        parts.push(format!("k={k}: {}/{}", r.geometric_type, r.commutator_type));
    }
    outcome(ok, parts.join(", "))
}

fn infinite_type() -> Outcome {
    let spec = parse_catalog_uri("catalog:infinite_type").unwrap();
    let p = BoundaryPoint::at(&spec, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let cfg = TypeConfig {
        cutoff: 12,
        commutator_cutoff: Some(8),
        degree: 6,
        ..Default::default()
    };
    let r = bloom_graham_check(&spec, &p, &cfg).unwrap();
    outcome(
        r.geometric_type == TypeValue::saturated(12) && r.commutator_type == TypeValue::saturated(8),
        format!("geometric {}, commutator {}", r.geometric_type, r.commutator_type),
    )
}

fn sequence_exponents() -> Outcome {
    let cfg = SequenceConfig {
        discs: 20,
        ..Default::default()
    };
    let model = parse_catalog_uri("catalog:model_type_2k?k=2").unwrap();
    let p = BoundaryPoint::at(&model, &[0.0; 4]).unwrap();
    let m_model = kontinuitats_sequence(&model, &p, &axis_disc(), &cfg)
        .unwrap()
        .fit
        .map(|f| f.exponent);

    let ball = parse_catalog_uri("catalog:ball").unwrap();
    let q = BoundaryPoint::at(&ball, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let tangent = AnalyticDisc::linear(vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let m_ball = kontinuitats_sequence(&ball, &q, &tangent, &cfg)
        .unwrap()
        .fit
        .map(|f| f.exponent);

    let within = |m: Option<f64>, lo: f64, hi: f64| m.is_some_and(|m| (lo..=hi).contains(&m));
    outcome(
        within(m_model, 3.8, 4.2) && within(m_ball, 1.8, 2.2),
        format!("model k=2 m = {m_model:.3?} (want 3.8..4.2), ball m = {m_ball:.3?} (want 1.8..2.2)"),
    )
}

fn disc_counterexamples() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for uri in ["catalog:annulus_times_disc", "catalog:example2_nonpseudoconvex"] {
        let spec = parse_catalog_uri(uri).unwrap();
        let disc = axis_disc();
        let r = disc_containment_test(
            &spec,
            &disc,
            ContainmentVariant::BoundaryInOpen,
            &DiscTestConfig::default(),
        )
        .unwrap();
        let centre = spec.membership(&disc.eval_real(c(0.0, 0.0))).unwrap();
        ok &= r.premise_holds && !r.conclusion_holds && r.witness == Some([0.0, 0.0]);
        ok &= centre == Membership::Exterior;
        parts.push(format!(
            "{uri}: premise {}, conclusion {}, witness {:?}",
            r.premise_holds, r.conclusion_holds, r.witness
        ));
    }
    for uri in ["catalog:ball", "catalog:annulus_times_disc"] {
        let spec = parse_catalog_uri(uri).unwrap();
        let cfg = DiscTestConfig {
            delta0: 0.1,
            trials: 10_000,
            seed: 0,
            ..Default::default()
        };
        let r = small_disc_search(&spec, &cfg, Execution::default()).unwrap();
        ok &= r.verdict == Verdict::NoViolation;
        parts.push(format!(
            "{uri}: {} violations in {} trials ({} premise discs)",
            r.violations, r.trials, r.premise_discs
        ));
    }
    outcome(ok, parts.join("; "))
}

fn hartogs() -> Outcome {
    let cfg = HartogsConfig {
        samples: 100_000,
        seed: 0,
        ..Default::default()
    };
    let bad = parse_catalog_uri("catalog:example2_nonpseudoconvex").unwrap();
    let ball = parse_catalog_uri("catalog:ball").unwrap();
    let rb = hartogs_check(&bad, &cfg, Execution::default()).unwrap();
    let rg = hartogs_check(&ball, &cfg, Execution::default()).unwrap();
    outcome(
        rb.violations >= 1 && rg.violations == 0,
        format!(
            "union: {} violations (worst defect {:.2e}); ball: {} violations (worst defect {:.2e})",
            rb.violations, rb.worst_defect, rg.violations, rg.worst_defect
        ),
    )
}

/// Random well-conditioned expression in `x0..x3`: every subexpression stays
/// finite and smooth on `[-1, 1]^4`.
fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.75) {
            Expr::var(rng.random_range(0..4))
        } else {
            Expr::constant(rng.random_range(-2.0..2.0))
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.random_range(0..9) {
        0 => a + random_expr(rng, depth - 1),
        1 => a - random_expr(rng, depth - 1),
        2 | 3 => a * random_expr(rng, depth - 1),
        4 => a / (1.0 + random_expr(rng, depth - 1).powi(2)),
        5 => (0.5 * a.clone() / (1.0 + a.powi(2)).sqrt()).exp(),
        6 => (1.0 + a.powi(2)).ln(),
        7 => (1.0 + a.powi(2)).sqrt(),
        _ => a.powi(rng.random_range(2..=3)),
    }
}

fn derivatives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let e = random_expr(&mut rng, 4);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let i = rng.random_range(0..4);
        let symbolic = e.diff(i).eval(&x).unwrap();
        let h = 1e-6;
        let shifted = |s: f64| {
            let mut y = x.clone();
            y[i] += s;
            e.eval(&y).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        worst = worst.max((symbolic - fd).abs() / symbolic.abs().max(1.0));
    }

    // integer samples keep every difference exact in floating point
    let g = |t: f64| Ok(t.powi(3) - 4.0 * t * t + 7.0);
    let mut exact = true;
    for x in -5..5 {
        for h in 1..4 {
            let (x, h) = (x as f64, h as f64);
            let v = |k: f64| g(x + k * h).unwrap();
            let d1 = forward_difference(g, x, h, 1).unwrap();
            let d2 = forward_difference(g, x, h, 2).unwrap();
            let d3 = forward_difference(g, x, h, 3).unwrap();
            let d2_from_d1 = forward_difference(g, x + h, h, 1).unwrap() - d1;
            exact &= d2 == v(2.0) - 2.0 * v(1.0) + v(0.0);
            exact &= d3 == v(3.0) - 3.0 * v(2.0) + 3.0 * v(1.0) - v(0.0);
            exact &= d2 == d2_from_d1;
            // the third difference of a monic cubic is 6 h^3
            exact &= d3 == 6.0 * h.powi(3);
        }
    }

    let lip = lipschitz_exponent(|t| Ok(t.abs().sqrt()), (-1.0, 1.0), 2, 1024).unwrap();
    outcome(
        worst <= 1e-5 && exact && (lip.alpha - 0.5).abs() <= 0.05,
        format!(
            "500 cases max rel error {worst:.1e}; difference identities exact: {exact}; alpha(|x|^(1/2)) = {:.4}",
            lip.alpha
        ),
    )
}

fn invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ok = true;
    let mut checked = 0;
    for k in 1..=3 {
        let spec = parse_catalog_uri(&format!("catalog:model_type_2k?k={k}")).unwrap();
        let origin = BoundaryPoint::at(&spec, &[0.0; 4]).unwrap();
        let base_flags = flags(&spec, &origin);
        let cfg = TypeConfig::default();
        let base = bloom_graham_check(&spec, &origin, &cfg).unwrap();
        for _ in 0..10 {
            let u = random_unitary(2, &mut rng);
            let rotated = spec.unitary_image(&u).unwrap();
            let px = to_real(&cmatvec(&u, &to_complex(&[0.0; 4])));
            let (a, b): (f64, f64) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let factor = 1.5 + a * Expr::re_z(0) + b * Expr::im_z(1) + Expr::abs_sq_z(0);
            let scaled = spec.rescaled(&factor).unwrap();
            for (s, x) in [(rotated, px), (scaled, vec![0.0; 4])] {
                let p = BoundaryPoint::at(&s, &x).unwrap();
                let r = bloom_graham_check(&s, &p, &cfg).unwrap();
                ok &= flags(&s, &p) == base_flags;
                ok &= r.geometric_type == base.geometric_type && r.commutator_type == base.commutator_type;
                checked += 1;
            }
        }
    }
    outcome(
        ok,
        format!("{checked} transformed domains, flags and types unchanged: {ok}"),
    )
}

fn flags(spec: &levilab::domain::DomainSpec, p: &BoundaryPoint) -> [bool; 4] {
    let r = classify_point(spec, p, DEFAULT_TOL_EIG).unwrap();
    [
        r.convex,
        r.strictly_convex,
        r.levi_pseudoconvex,
        r.strictly_pseudoconvex,
    ]
}

fn main() {
    // name, check, time limit in seconds
    type Criterion = (&'static str, fn() -> Outcome, Option<u64>);
    let criteria: [Criterion; 9] = [
        ("harmonic disc centre leaves the domain", harmonic_centre, Some(1)),
        ("ball classification", ball_classification, Some(5)),
        ("type ladder 2k", type_ladder, Some(60)),
        ("infinite type saturation", infinite_type, Some(120)),
        ("disc sequence exponents", sequence_exponents, Some(30)),
        (
            "disc counterexamples and small disc search",
            disc_counterexamples,
            Some(60),
        ),
        ("sampled Hartogs test", hartogs, Some(60)),
        ("derivatives and differences", derivatives, Some(10)),
        ("invariance under unitaries and rescaling", invariance, None),
    ];
    let mut failures = Vec::new();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let t = start.elapsed();
        let in_time = limit.is_none_or(|s| t < Duration::from_secs(s));
        let status = if o.passed && in_time { "PASS" } else { "FAIL" };
        let budget = limit.map_or(String::new(), |s| format!(" / {s} s"));
        println!(
            "{status} [{}] {name}: {} ({:.2} s{budget})",
            i + 1,
            o.detail,
            t.as_secs_f64()
        );
        if status == "FAIL" {
            failures.push(*name);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed criteria: {failures:?}");
        std::process::exit(1);
    }
}
