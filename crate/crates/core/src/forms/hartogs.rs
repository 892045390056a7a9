//! Sampled sub-mean-value test for `u = -log delta` on complex circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{
    boundary_distance, nearest_boundary_point, nearest_boundary_point_from, BoundaryPoint, DomainSpec,
};
use crate::error::{Error, Result};
use crate::linalg::{to_complex, to_real, CVec};
use crate::par::{map_indexed, Execution};

/// A circle violates the sub-mean-value property when its defect exceeds
/// `DEFECT_REL_TOL * (1 + |u(z)|)`.
pub const DEFECT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartogsConfig {
    /// Number of interior points.
    pub samples: usize,
    /// Random complex lines tested through each point.
    pub lines: usize,
    /// Points on each circle.
    pub circle_points: usize,
    /// Radii are drawn log-uniformly from `[r_min, r_max] * delta(z)`.
    pub r_min: f64,
    pub r_max: f64,
    pub seed: u64,
    /// Rejection attempts per interior sample.
    pub attempts: usize,
    /// At most this many violations are listed in the report.
    pub max_recorded: usize,
}

impl Default for HartogsConfig {
    fn default() -> Self {
        HartogsConfig {
            samples: 10_000,
            lines: 1,
            circle_points: 64,
            r_min: 1e-3,
            r_max: 1e-1,
            seed: 0,
            attempts: 1000,
            max_recorded: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartogsViolation {
    pub z: Vec<[f64; 2]>,
    pub direction: Vec<[f64; 2]>,
    pub r: f64,
    /// `u(z) - mean_k u(z + r e^{i theta_k} l)`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartogsReport {
    pub violations: usize,
    /// Largest defect over all circles; positive values are violations.
    pub worst_defect: f64,
    pub circles_tested: usize,
    pub interior_points: usize,
    /// Circles dropped because a distance evaluation failed.
    pub skipped: usize,
    pub recorded: Vec<HartogsViolation>,
    pub config: HartogsConfig,
}

/// Distance from `x`, warm-started from the foot point of the circle centre
/// on smooth domains.
fn distance(spec: &DomainSpec, x: &[f64], foot: Option<&BoundaryPoint>) -> Result<f64> {
    match foot {
        Some(h) => {
            let p = nearest_boundary_point_from(spec, x, h)?;
            Ok(x.iter()
                .zip(&p.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt())
        }
        None => boundary_distance(spec, x),
    }
}

enum Outcome {
    NoPoint,
    Lines(Vec<Option<(f64, Option<HartogsViolation>)>>),
}

fn pairs(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    loop {
        let v: CVec = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let s = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if s > 1e-12 {
            return v.into_iter().map(|c| c / s).collect();
        }
    }
}

fn test_line(
    spec: &DomainSpec,
    cfg: &HartogsConfig,
    x: &[f64],
    delta: f64,
    foot: Option<&BoundaryPoint>,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, Option<HartogsViolation>)> {
    let z = to_complex(x);
    let l = random_direction(rng, spec.n);
    let r = delta * rng.random_range(cfg.r_min.ln()..=cfg.r_max.ln()).exp();
    let u0 = -delta.ln();
    let k = cfg.circle_points;
    let mut sum = 0.0;
    for i in 0..k {
        let e = Complex64::from_polar(r, 2.0 * PI * i as f64 / k as f64);
        let w: CVec = z.iter().zip(&l).map(|(a, b)| a + e * b).collect();
        let d = distance(spec, &to_real(&w), foot).ok().filter(|d| *d > 0.0)?;
        sum -= d.ln();
    }
    let defect = u0 - sum / k as f64;
    let violation = (defect > DEFECT_REL_TOL * (1.0 + u0.abs())).then(|| HartogsViolation {
        z: pairs(&z),
        direction: pairs(&l),
        r,
        defect,
    });
    Some((defect, violation))
}

/// Tests `u(z) <= mean of u over z + r e^{i theta} l` for `u = -log delta`
/// at `samples` random interior points, `lines` random complex directions
/// each, and `circle_points` equally spaced angles.
///
/// Sample `i` draws from its own ChaCha stream, so results are identical in
/// sequential and parallel mode.
pub fn hartogs_check(spec: &DomainSpec, cfg: &HartogsConfig, exec: Execution) -> Result<HartogsReport> {
    if cfg.samples == 0 || cfg.lines == 0 || cfg.circle_points < 3 {
        return Err(Error::InvalidParameter(
            "samples and lines must be positive and circle_points at least 3".into(),
        ));
    }
    if !(cfg.r_min > 0.0 && cfg.r_min <= cfg.r_max && cfg.r_max < 1.0) {
        return Err(Error::InvalidParameter(
            "radius range must satisfy 0 < r_min <= r_max < 1".into(),
        ));
    }
    let outcomes = map_indexed(exec, cfg.samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let Some(x) = spec.sample_interior(&mut rng, cfg.attempts) else {
            return Outcome::NoPoint;
        };
        let foot = if spec.smooth() {
            match nearest_boundary_point(spec, &x) {
                Ok(p) => Some(p),
                Err(_) => return Outcome::NoPoint,
            }
        } else {
            None
        };
        match distance(spec, &x, None) {
            Ok(delta) if delta > 0.0 => Outcome::Lines(
                (0..cfg.lines)
                    .map(|_| test_line(spec, cfg, &x, delta, foot.as_ref(), &mut rng))
                    .collect(),
            ),
            _ => Outcome::NoPoint,
        }
    });

    let mut report = HartogsReport {
        violations: 0,
        worst_defect: f64::NEG_INFINITY,
        circles_tested: 0,
        interior_points: 0,
        skipped: 0,
        recorded: Vec::new(),
        config: cfg.clone(),
    };
    for o in outcomes {
        let Outcome::Lines(lines) = o else { continue };
        report.interior_points += 1;
        for line in lines {
            let Some((defect, violation)) = line else {
                report.skipped += 1;
                continue;
            };
            report.circles_tested += 1;
            report.worst_defect = report.worst_defect.max(defect);
            if let Some(v) = violation {
                report.violations += 1;
                if report.recorded.len() < cfg.max_recorded {
                    report.recorded.push(v);
                }
            }
        }
    }
    if report.interior_points * 2 < cfg.samples || report.circles_tested == 0 {
        return Err(Error::Sampling(format!(
            "only {} of {} samples produced an interior point with a usable distance",
            report.interior_points, cfg.samples
        )));
    }
    Ok(report)
}
