use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{disc_grid, AnalyticDisc};
use crate::domain::{boundary_distance, outward_normal, BoundaryPoint, DomainSpec, Membership};
use crate::error::{Error, Result};
use crate::expr::difference::least_squares_slope;
use crate::forms::wirtinger_gradient;
use crate::linalg::{cdot, cnorm, norm, to_complex, CVec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    /// Number of discs `J`.
    pub discs: usize,
    pub boundary_samples: usize,
    pub rings: usize,
    pub tol_membership: f64,
    pub bisection_steps: usize,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        SequenceConfig {
            discs: 20,
            boundary_samples: 64,
            rings: 8,
            tol_membership: 1e-7,
            bisection_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub j: usize,
    /// Largest `r <= 1` with `phi(r zeta) - nu / j` inside the closure.
    pub radius: f64,
    pub center: Vec<[f64; 2]>,
    pub center_distance: f64,
    pub diameter: f64,
    /// `sup` over disc samples of the distance to the boundary.
    pub hausdorff: f64,
    /// Whether `dist(center, P)` lies in `[diameter / 2, 2 diameter]`.
    pub center_within_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub residual: f64,
    /// Records `j >= from_j` with `radius < 1` enter the fit.
    pub from_j: usize,
    pub records_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentDirection {
    /// Unit vector, phase fixed so its largest component is real positive.
    pub tau: Vec<[f64; 2]>,
    /// Largest distance of an aligned unit derivative from `tau`.
    pub dispersion: f64,
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscSequenceReport {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub records: Vec<SequenceRecord>,
    /// Discs whose centre already left the closure.
    pub skipped: Vec<usize>,
    pub fit: Option<ExponentFit>,
    /// Fewer than two records were usable for the fit.
    pub insufficient: bool,
    pub tangent: Option<TangentDirection>,
    pub config: SequenceConfig,
}

fn contained(spec: &DomainSpec, disc: &AnalyticDisc, grid: &[Complex64], tol: f64) -> Result<bool> {
    for z in grid {
        if spec.classify(&disc.eval_real(*z), tol)? == Membership::Exterior {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pushes a disc tangent at `P` into the domain along the inward normal:
/// `phi_j(zeta) = phi(r_j zeta) - nu / j`, with `r_j` the largest radius
/// keeping the disc in the closure. Records centre, diameter `delta_j` and
/// the one-sided distance `h_j`, and fits `h_j ~ delta_j^m` on the second
/// half of the sequence.
pub fn kontinuitats_sequence(
    spec: &DomainSpec,
    p: &BoundaryPoint,
    base: &AnalyticDisc,
    cfg: &SequenceConfig,
) -> Result<DiscSequenceReport> {
    spec.require_rho()?;
    if cfg.discs == 0 || cfg.boundary_samples < 16 || cfg.rings == 0 {
        return Err(Error::InvalidParameter(
            "need at least one disc, 16 boundary samples and one ring".into(),
        ));
    }
    if base.dim() != spec.n {
        return Err(Error::InvalidParameter("disc and domain dimensions differ".into()));
    }
    let c0 = base.eval_real(Complex64::new(0.0, 0.0));
    let off = norm(&c0.iter().zip(&p.coords).map(|(a, b)| a - b).collect::<Vec<_>>());
    if off > 1e-7 * (1.0 + norm(&p.coords)) {
        return Err(Error::InvalidParameter("base disc is not centred at P".into()));
    }
    let (_, g) = spec.value_and_grad(&p.coords)?;
    let gz = wirtinger_gradient(&g);
    let a1 = base.derivative_at_zero();
    let pairing: Complex64 = gz.iter().zip(&a1).map(|(x, y)| x * y).sum();
    if pairing.norm() > 1e-7 * cnorm(&gz) * (1.0 + cnorm(&a1)) {
        return Err(Error::InvalidParameter(
            "base disc is not tangent to the boundary at P".into(),
        ));
    }
    let nu = outward_normal(spec, p)?;
    let nu_c = to_complex(&nu);
    let grid = disc_grid(cfg.boundary_samples, cfg.rings);

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut derivs = Vec::new();
    for j in 1..=cfg.discs {
        let shift: CVec = nu_c.iter().map(|v| -v / j as f64).collect();
        let at = |r: f64| base.precompose(Complex64::new(r, 0.0)).translate(&shift);
        let radius = if contained(spec, &at(1.0), &grid, cfg.tol_membership)? {
            1.0
        } else if !contained(spec, &at(0.0), &grid[..1], cfg.tol_membership)? {
            skipped.push(j);
            continue;
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..cfg.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if contained(spec, &at(mid), &grid, cfg.tol_membership)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let disc = at(radius);
        let center = disc.eval_real(Complex64::new(0.0, 0.0));
        let center_distance = norm(&center.iter().zip(&p.coords).map(|(a, b)| a - b).collect::<Vec<_>>());
        let diameter = disc.diameter_with(cfg.boundary_samples.max(64));
        let mut h = 0.0f64;
        for z in &grid {
            let x = disc.eval_real(*z);
            if spec.level(&x)? < 0.0 {
                h = h.max(boundary_distance(spec, &x)?);
            }
        }
        derivs.push(disc.derivative_at_zero());
        records.push(SequenceRecord {
            j,
            radius,
            center: disc.center().iter().map(|c| [c.re, c.im]).collect(),
            center_distance,
            diameter,
            hausdorff: h,
            center_within_window: center_distance >= 0.5 * diameter && center_distance <= 2.0 * diameter,
        });
    }

    let from_j = cfg.discs.div_ceil(2);
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.j >= from_j && r.radius < 1.0 - 1e-9 && r.diameter > 0.0 && r.hausdorff > 0.0)
        .map(|r| (r.diameter.ln(), r.hausdorff.ln()))
        .collect();
    let fit = (pts.len() >= 2).then(|| {
        let (exponent, residual) = least_squares_slope(&pts);
        ExponentFit {
            exponent,
            residual,
            from_j,
            records_used: pts.len(),
        }
    });
    let tangent = limit_tangent_direction(&derivs).ok();
    Ok(DiscSequenceReport {
        point: p.coords.clone(),
        normal: nu,
        insufficient: fit.is_none(),
        records,
        skipped,
        fit,
        tangent,
        config: cfg.clone(),
    })
}

/// Averages the unit vectors `phi_j'(0) / |phi_j'(0)|` after aligning their
/// phases with the first one.
pub fn limit_tangent_direction(derivatives: &[CVec]) -> Result<TangentDirection> {
    let units: Vec<CVec> = derivatives
        .iter()
        .filter(|v| cnorm(v) > 0.0)
        .map(|v| {
            let s = cnorm(v);
            v.iter().map(|c| c / s).collect()
        })
        .collect();
    if units.is_empty() {
        return Err(Error::SingularDiscs);
    }
    if units.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} nonsingular discs, at least 3 needed",
            units.len()
        )));
    }
    let reference = &units[0];
    let aligned: Vec<CVec> = units
        .iter()
        .map(|v| {
            let c = cdot(reference, v);
            let phase = if c.norm() > 0.0 {
                c.conj() / c.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            v.iter().map(|x| x * phase).collect()
        })
        .collect();
    let n = reference.len();
    let mut mean = vec![Complex64::new(0.0, 0.0); n];
    for v in &aligned {
        mean.iter_mut().zip(v).for_each(|(a, b)| *a += b);
    }
    let s = cnorm(&mean);
    if s == 0.0 {
        return Err(Error::SingularDiscs);
    }
    let imax = (0..n)
        .max_by(|&a, &b| mean[a].norm().total_cmp(&mean[b].norm()))
        .unwrap_or(0);
    let fix = mean[imax].conj() / (mean[imax].norm() * s);
    let tau: CVec = mean.iter().map(|x| x * fix).collect();
    let rot = fix * s;
    let dispersion = aligned
        .iter()
        .map(|v| {
            v.iter()
                .zip(&tau)
                .map(|(a, t)| (a * rot - t).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Ok(TangentDirection {
        tau: tau.iter().map(|c| [c.re, c.im]).collect(),
        dispersion,
        used: units.len(),
    })
}
