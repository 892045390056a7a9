use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{disc_grid, unit, AnalyticDisc};
use crate::domain::{boundary_distance, DomainSpec, Membership};
use crate::error::{Error, Result};
use crate::linalg::{to_complex, CVec};
use crate::par::{map_indexed, Execution};

/// Which containment implication is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainmentVariant {
    /// Boundary in the closure implies image in the closure.
    BoundaryInClosure,
    /// Boundary in the open domain implies image in the open domain.
    BoundaryInOpen,
    /// Boundary in the boundary implies image in the closure.
    BoundaryInBoundary,
}

impl ContainmentVariant {
    fn premise(self, m: Membership) -> bool {
        match self {
            ContainmentVariant::BoundaryInClosure => m != Membership::Exterior,
            ContainmentVariant::BoundaryInOpen => m == Membership::Interior,
            ContainmentVariant::BoundaryInBoundary => m == Membership::Boundary,
        }
    }

    fn conclusion(self, m: Membership) -> bool {
        match self {
            ContainmentVariant::BoundaryInOpen => m == Membership::Interior,
            _ => m != Membership::Exterior,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscTestConfig {
    /// Largest disc diameter in random searches.
    pub delta0: f64,
    pub trials: usize,
    pub boundary_samples: usize,
    pub interior_rings: usize,
    /// Points with `|rho| <= tol (1 + |grad rho|)` count as boundary points.
    pub tol_membership: f64,
    pub seed: u64,
    /// Random discs have degree `1..=max_degree`.
    pub max_degree: usize,
    /// Discs drawn per trial until one satisfies the premise.
    pub premise_attempts: usize,
}

impl Default for DiscTestConfig {
    fn default() -> Self {
        DiscTestConfig {
            delta0: 0.1,
            trials: 1000,
            boundary_samples: 256,
            interior_rings: 8,
            tol_membership: 1e-7,
            seed: 0,
            max_degree: 3,
            premise_attempts: 64,
        }
    }
}

impl DiscTestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::InvalidParameter("delta0 must be positive".into()));
        }
        if self.boundary_samples < 16 || self.trials == 0 || self.interior_rings == 0 {
            return Err(Error::InvalidParameter(
                "boundary_samples must be at least 16, trials and interior_rings positive".into(),
            ));
        }
        if !(self.tol_membership >= 0.0) || self.max_degree == 0 || self.premise_attempts == 0 {
            return Err(Error::InvalidParameter(
                "tol_membership must be non-negative, max_degree and premise_attempts positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentResult {
    pub variant: ContainmentVariant,
    pub premise_holds: bool,
    pub conclusion_holds: bool,
    /// First boundary parameter violating the premise.
    pub premise_witness: Option<[f64; 2]>,
    /// First grid parameter violating the conclusion.
    pub witness: Option<[f64; 2]>,
    pub tol_membership: f64,
    pub boundary_samples: usize,
    pub interior_rings: usize,
}

fn classify(spec: &DomainSpec, disc: &AnalyticDisc, zeta: Complex64, tol: f64) -> Result<Membership> {
    spec.classify(&disc.eval_real(zeta), tol)
}

fn first_failure(
    spec: &DomainSpec,
    disc: &AnalyticDisc,
    params: impl IntoIterator<Item = Complex64>,
    tol: f64,
    ok: impl Fn(Membership) -> bool,
) -> Result<Option<Complex64>> {
    for z in params {
        if !ok(classify(spec, disc, z, tol)?) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Checks the premise on `boundary_samples` points of the circle, then the
/// conclusion on the grid `0, rings i / R` (the last ring being the circle).
pub fn disc_containment_test(
    spec: &DomainSpec,
    disc: &AnalyticDisc,
    variant: ContainmentVariant,
    cfg: &DiscTestConfig,
) -> Result<ContainmentResult> {
    check_dim(spec, disc)?;
    let k = cfg.boundary_samples.max(16);
    let tol = cfg.tol_membership;
    let premise = first_failure(spec, disc, (0..k).map(|i| unit(i, k)), tol, |m| variant.premise(m))?;
    let conclusion = first_failure(spec, disc, disc_grid(k, cfg.interior_rings.max(1)), tol, |m| {
        variant.conclusion(m)
    })?;
    Ok(ContainmentResult {
        variant,
        premise_holds: premise.is_none(),
        conclusion_holds: conclusion.is_none(),
        premise_witness: premise.map(pair),
        witness: conclusion.map(pair),
        tol_membership: tol,
        boundary_samples: k,
        interior_rings: cfg.interior_rings.max(1),
    })
}

fn check_dim(spec: &DomainSpec, disc: &AnalyticDisc) -> Result<()> {
    if disc.dim() != spec.n {
        return Err(Error::InvalidParameter(format!(
            "disc lives in C^{} but the domain in C^{}",
            disc.dim(),
            spec.n
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NoViolation,
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub disc: AnalyticDisc,
    pub diameter: f64,
    /// Parameter whose image leaves the domain.
    pub witness: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDiscReport {
    pub verdict: Verdict,
    /// Lowest-index violating trial.
    pub counterexample: Option<Counterexample>,
    pub violations: usize,
    pub trials: usize,
    /// Trials that produced a disc with boundary inside the domain.
    pub premise_discs: usize,
    pub config: DiscTestConfig,
}

enum Trial {
    NoPremise,
    Clean,
    Violation(Counterexample),
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Interior point within `delta0` of the boundary.
fn near_boundary_point(spec: &DomainSpec, rng: &mut ChaCha8Rng, delta0: f64) -> Option<Vec<f64>> {
    for _ in 0..64 {
        let x = spec.sample_interior(rng, 1000)?;
        if boundary_distance(spec, &x).is_ok_and(|d| d <= delta0) {
            return Some(x);
        }
    }
    None
}

fn random_disc(spec: &DomainSpec, cfg: &DiscTestConfig, rng: &mut ChaCha8Rng) -> Option<AnalyticDisc> {
    let center = near_boundary_point(spec, rng, cfg.delta0)?;
    let degree = rng.random_range(1..=cfg.max_degree);
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); spec.n]];
    coeffs.extend((0..degree).map(|_| gaussian_vec(rng, spec.n)));
    let raw = AnalyticDisc { coeffs };
    let d = raw.diameter_with(64);
    if d < 1e-12 {
        return None;
    }
    let target = rng.random_range(0.5 * cfg.delta0..=cfg.delta0);
    let s = target / d;
    let mut coeffs = raw.coeffs;
    coeffs.iter_mut().flatten().for_each(|c| *c *= s);
    coeffs[0] = to_complex(&center);
    Some(AnalyticDisc { coeffs })
}

fn run_trial(spec: &DomainSpec, cfg: &DiscTestConfig, trial: usize) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let variant = ContainmentVariant::BoundaryInOpen;
    let k = cfg.boundary_samples;
    for _ in 0..cfg.premise_attempts {
        let Some(disc) = random_disc(spec, cfg, &mut rng) else {
            continue;
        };
        let premise = first_failure(spec, &disc, (0..k).map(|i| unit(i, k)), cfg.tol_membership, |m| {
            variant.premise(m)
        })?;
        if premise.is_some() {
            continue;
        }
        let grid = disc_grid(k, cfg.interior_rings);
        // the boundary ring was just checked
        let interior = grid.into_iter().take(1 + k * (cfg.interior_rings - 1));
        return Ok(
            match first_failure(spec, &disc, interior, cfg.tol_membership, |m| variant.conclusion(m))? {
                None => Trial::Clean,
                Some(z) => Trial::Violation(Counterexample {
                    trial,
                    diameter: disc.diameter(),
                    disc,
                    witness: pair(z),
                }),
            },
        );
    }
    Ok(Trial::NoPremise)
}

/// Random discs of diameter in `[delta0 / 2, delta0]`, centred at interior
/// points within `delta0` of the boundary, whose boundary circle lies in
/// the domain; reports discs whose interior leaves it.
///
/// Trial `i` uses ChaCha stream `i` of `seed`, so the report does not depend
/// on the execution mode or thread count.
pub fn small_disc_search(spec: &DomainSpec, cfg: &DiscTestConfig, exec: Execution) -> Result<SmallDiscReport> {
    cfg.validate()?;
    let outcomes = map_indexed(exec, cfg.trials, |i| run_trial(spec, cfg, i));
    let mut report = SmallDiscReport {
        verdict: Verdict::NoViolation,
        counterexample: None,
        violations: 0,
        trials: cfg.trials,
        premise_discs: 0,
        config: cfg.clone(),
    };
    for o in outcomes {
        match o? {
            Trial::NoPremise => {}
            Trial::Clean => report.premise_discs += 1,
            Trial::Violation(c) => {
                report.premise_discs += 1;
                report.violations += 1;
                if report.counterexample.is_none() {
                    report.counterexample = Some(c);
                    report.verdict = Verdict::Counterexample;
                }
            }
        }
    }
    if report.premise_discs == 0 {
        return Err(Error::Sampling(format!(
            "none of {} trials produced a disc with boundary inside the domain",
            cfg.trials
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeWitness {
    /// Boundary circle in the boundary and some interior point on it too.
    pub is_witness: bool,
    pub premise_holds: bool,
    /// Interior parameters whose image lies on the boundary.
    pub touching: Vec<[f64; 2]>,
}

/// Looks for a disc violating the extremality condition: `psi(circle)` in
/// the boundary while `psi(open disc)` meets the boundary too.
pub fn extreme_witness_check(spec: &DomainSpec, disc: &AnalyticDisc, cfg: &DiscTestConfig) -> Result<ExtremeWitness> {
    check_dim(spec, disc)?;
    let k = cfg.boundary_samples.max(16);
    let tol = cfg.tol_membership;
    let premise = first_failure(spec, disc, (0..k).map(|i| unit(i, k)), tol, |m| {
        m == Membership::Boundary
    })?
    .is_none();
    let rings = cfg.interior_rings.max(2);
    let mut touching = Vec::new();
    if premise {
        for z in disc_grid(k, rings).into_iter().take(1 + k * (rings - 1)) {
            if classify(spec, disc, z, tol)? == Membership::Boundary {
                touching.push(pair(z));
            }
        }
    }
    Ok(ExtremeWitness {
        is_witness: premise && !touching.is_empty(),
        premise_holds: premise,
        touching,
    })
}
