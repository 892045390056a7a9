//! End-to-end scripted scenarios: a disc whose boundary lies in the domain
//! while its centre does not, on a pseudoconvex and on a non-pseudoconvex
//! domain, and a harmonic disc escaping a pseudoconvex product domain.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::disc::{disc_containment_test, AnalyticDisc, ContainmentVariant, DiscTestConfig, HarmonicDisc};
use crate::domain::{parse_catalog_uri, Membership};
use crate::error::{Error, Result};
use crate::forms::{hartogs_check, HartogsConfig};
use crate::linalg::to_real;
use crate::par::Execution;

pub const SCENARIO_NAMES: &[&str] = &["example1", "example2", "example3"];

/// Per-coordinate tolerance of the harmonic centre against its closed form.
pub const CENTRE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCheck {
    pub name: String,
    pub expected: Value,
    pub observed: Value,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub domain: String,
    pub description: String,
    pub checks: Vec<ScenarioCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    /// Offset of the example3 curve from the removed square.
    pub eps: f64,
    /// Samples on the example3 curve.
    pub curve_samples: usize,
    pub seed: u64,
    /// Hartogs samples in example2.
    pub hartogs_samples: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            eps: 0.01,
            curve_samples: 4096,
            seed: 0,
            hartogs_samples: 20_000,
        }
    }
}

fn check(name: &str, expected: Value, observed: Value, passed: bool) -> ScenarioCheck {
    ScenarioCheck {
        name: name.into(),
        expected,
        observed,
        passed,
    }
}

fn report(name: &str, domain: &str, description: &str, checks: Vec<ScenarioCheck>) -> ScenarioReport {
    ScenarioReport {
        name: name.into(),
        domain: domain.into(),
        description: description.into(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// The disc `zeta -> (zeta, 0)`.
pub fn axis_disc() -> AnalyticDisc {
    let z = Complex64::new(0.0, 0.0);
    AnalyticDisc::linear(vec![z, z], vec![Complex64::new(1.0, 0.0), z]).expect("valid disc")
}

fn disc_scenario(name: &str, uri: &str, description: &str) -> Result<(ScenarioReport, crate::domain::DomainSpec)> {
    let spec = parse_catalog_uri(uri)?;
    let disc = axis_disc();
    let cfg = DiscTestConfig::default();
    let r = disc_containment_test(&spec, &disc, ContainmentVariant::BoundaryInOpen, &cfg)?;
    let centre = spec.membership(&disc.eval_real(Complex64::new(0.0, 0.0)))?;
    let checks = vec![
        check(
            "boundary_circle_in_domain",
            json!(true),
            json!(r.premise_holds),
            r.premise_holds,
        ),
        check(
            "closed_disc_in_domain",
            json!(false),
            json!(r.conclusion_holds),
            !r.conclusion_holds,
        ),
        check(
            "first_escaping_parameter",
            json!([0.0, 0.0]),
            json!(r.witness),
            r.witness == Some([0.0, 0.0]),
        ),
        check(
            "centre_membership",
            json!("exterior"),
            json!(centre),
            centre == Membership::Exterior,
        ),
    ];
    Ok((report(name, uri, description, checks), spec))
}

/// Annulus times disc: the boundary of `zeta -> (zeta, 0)` lies in the
/// domain, its centre does not, although the domain is pseudoconvex.
pub fn example1() -> Result<ScenarioReport> {
    Ok(disc_scenario(
        "example1",
        "catalog:annulus_times_disc",
        "disc (zeta, 0) with boundary in A x D and centre outside; A x D is pseudoconvex",
    )?
    .0)
}

/// The same disc on the non-pseudoconvex union, plus a sampled Hartogs run
/// showing that `-log delta` fails the sub-mean-value property there.
pub fn example2(opts: &ScenarioOptions) -> Result<ScenarioReport> {
    let (mut rep, spec) = disc_scenario(
        "example2",
        "catalog:example2_nonpseudoconvex",
        "disc (zeta, 0) with boundary in the union and centre outside; the union is not pseudoconvex",
    )?;
    let h = hartogs_check(
        &spec,
        &HartogsConfig {
            samples: opts.hartogs_samples,
            seed: opts.seed,
            ..Default::default()
        },
        Execution::default(),
    )?;
    rep.checks.push(check(
        "hartogs_violations",
        json!(">= 1"),
        json!(h.violations),
        h.violations >= 1,
    ));
    rep.passed = rep.checks.iter().all(|c| c.passed);
    Ok(rep)
}

/// Second coordinate of the closed square-edge curve at `t in [0, 4)`.
pub fn example3_curve(eps: f64, t: f64) -> Complex64 {
    let a = 1.0 + eps;
    let i = Complex64::i();
    if t <= 1.0 {
        a + i * a * t
    } else if t <= 2.0 {
        2.0 * a + i * a - t * a
    } else if t <= 3.0 {
        i * a - 2.0 * a + t * a
    } else {
        a + 4.0 * i * a - t * i * a
    }
}

/// The closed form of the harmonic centre: `(2 - eps, 3/4 (1 + eps) (1 + i))`.
pub fn example3_closed_form(eps: f64) -> [Complex64; 2] {
    let c = 0.75 * (1.0 + eps);
    [Complex64::new(2.0 - eps, 0.0), Complex64::new(c, c)]
}

/// Harmonic disc bounded by a curve in `D(0,3) x A` whose centre, the mean
/// of the curve, leaves the domain.
pub fn example3(opts: &ScenarioOptions) -> Result<ScenarioReport> {
    let (eps, k) = (opts.eps, opts.curve_samples);
    if !(eps > 0.0 && eps < 0.5) || k % 4 != 0 {
        return Err(Error::InvalidParameter(
            "example3 needs 0 < eps < 0.5 and a sample count divisible by 4".into(),
        ));
    }
    let uri = format!("catalog:square_frame_times_disc?eps={eps}");
    let spec = parse_catalog_uri(&uri)?;
    let first = Complex64::new(2.0 - eps, 0.0);
    let samples: Vec<Vec<Complex64>> = (0..k)
        .map(|j| vec![first, example3_curve(eps, 4.0 * j as f64 / k as f64)])
        .collect();
    let curve_inside = samples
        .iter()
        .map(|s| spec.membership(&to_real(s)))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|m| *m == Membership::Interior);
    let hd = HarmonicDisc::from_samples(samples)?;
    let centre = hd.center();
    let expected = example3_closed_form(eps);
    let err = centre
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a.re - b.re).abs().max((a.im - b.im).abs()))
        .fold(0.0, f64::max);
    let membership = spec.membership(&to_real(&centre))?;
    let pairs = |v: &[Complex64]| v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
    let checks = vec![
        check("curve_in_domain", json!(true), json!(curve_inside), curve_inside),
        check(
            "harmonic_centre",
            json!({ "value": pairs(&expected), "tolerance": CENTRE_TOL }),
            json!({ "value": pairs(&centre), "max_error": err }),
            err <= CENTRE_TOL,
        ),
        check(
            "centre_membership",
            json!("exterior"),
            json!(membership),
            membership == Membership::Exterior,
        ),
    ];
    Ok(report(
        "example3",
        &uri,
        "harmonic disc bounded by a closed curve in D(0,3) x A whose centre lies outside",
        checks,
    ))
}

pub fn run_scenario(name: &str, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    match name {
        "example1" => example1(),
        "example2" => example2(opts),
        "example3" => example3(opts),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_is_closed_and_continuous() {
        let eps = 0.01;
        for t in [1.0, 2.0, 3.0] {
            let l = example3_curve(eps, t);
            let r = example3_curve(eps, t + 1e-12);
            assert!((l - r).norm() < 1e-10);
        }
        assert!((example3_curve(eps, 4.0 - 1e-12) - example3_curve(eps, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn all_scenarios_pass() {
        let opts = ScenarioOptions::default();
        for name in SCENARIO_NAMES {
            let r = run_scenario(name, &opts).unwrap();
            assert!(r.passed, "{r:#?}");
        }
        assert!(run_scenario("example4", &opts).is_err());
    }
}
