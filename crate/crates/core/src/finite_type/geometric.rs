//! Contact order of analytic discs and a greedy search for the best one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TypeValue;
use crate::disc::AnalyticDisc;
use crate::domain::{normalize_coordinates, BoundaryPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::expr::curve::JET_ZERO_REL;
use crate::expr::{disc_jet, Expr, DEFAULT_MAX_JET_ORDER};
use crate::linalg::{cmatvec_adjoint, random_unitary, CVec};
use crate::par::{map_slice, Execution};

/// Vanishing order of `rho o disc` at 0, read off its jet up to `cutoff`.
pub fn contact_order(spec: &DomainSpec, disc: &AnalyticDisc, cutoff: usize) -> Result<TypeValue> {
    let rho = spec.require_rho()?;
    if !disc.is_nonsingular() {
        return Err(Error::SingularDisc);
    }
    if cutoff == 0 || cutoff > DEFAULT_MAX_JET_ORDER {
        return Err(Error::InvalidParameter(format!(
            "cutoff must lie in 1..={DEFAULT_MAX_JET_ORDER}"
        )));
    }
    let c = disc.eval_real(Complex64::new(0.0, 0.0));
    let v = spec.level(&c)?;
    if v.abs() > spec.tol_boundary {
        return Err(Error::InvalidParameter(format!(
            "disc centre is not on the boundary: |rho| = {:e}",
            v.abs()
        )));
    }
    let jet = disc_jet(rho, disc.coeffs(), cutoff)?;
    // degree 0 is the boundary residual of the centre, checked above
    let scale = jet.max_abs();
    Ok((1..=cutoff)
        .find(|&k| {
            jet.homogeneous(k)
                .iter()
                .any(|c| c.abs() > JET_ZERO_REL * (1.0 + scale))
        })
        .map_or(TypeValue::saturated(cutoff), TypeValue::exact))
}

#[derive(Debug, Clone)]
pub struct GeometricResult {
    pub value: TypeValue,
    pub witness: AnalyticDisc,
    /// `witness'(0)` in the original coordinates.
    pub direction: CVec,
    pub directions_tried: usize,
    /// Some least-squares solve stopped on its iteration cap.
    pub budget_exhausted: bool,
}

/// Absolute tolerance on the jet coefficients of the normalized `rho o disc`.
/// Residual tolerance of the coefficient solve.
pub const SOLVE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 80;

/// Disc parametrization in normalized coordinates `w = U (z - P)`:
/// `w(zeta) = zeta (tau, 0) + sum_{k=2..d} A_k zeta^k` with the `A_k` free.
struct Search<'a> {
    rho: &'a Expr,
    center: CVec,
    unitary: &'a [CVec],
    scale: f64,
    n: usize,
    degree: usize,
}

impl Search<'_> {
    fn disc(&self, tau: &[Complex64], theta: &[f64]) -> Vec<CVec> {
        let n = self.n;
        let mut first: CVec = tau.to_vec();
        first.push(Complex64::new(0.0, 0.0));
        let mut coeffs = vec![self.center.clone(), cmatvec_adjoint(self.unitary, &first)];
        for k in 2..=self.degree {
            let base = (k - 2) * 2 * n;
            let a: CVec = (0..n)
                .map(|i| {
                    Complex64::new(
                        theta.get(base + 2 * i).copied().unwrap_or(0.0),
                        theta.get(base + 2 * i + 1).copied().unwrap_or(0.0),
                    )
                })
                .collect();
            coeffs.push(cmatvec_adjoint(self.unitary, &a));
        }
        coeffs
    }

    /// Jet coefficients of degrees `2..level` of the normalized `rho o disc`.
    fn residual(&self, tau: &[Complex64], theta: &[f64], level: usize) -> Result<Vec<f64>> {
        let jet = disc_jet(self.rho, &self.disc(tau, theta), level - 1)?;
        Ok((2..level)
            .flat_map(|k| jet.homogeneous(k))
            .map(|c| c * self.scale)
            .collect())
    }

    /// Levenberg-Marquardt on the first `free` parameters. Returns whether
    /// the residual reached the tolerance and whether the iteration cap hit.
    fn solve(&self, tau: &[Complex64], theta: &mut [f64], free: usize, level: usize) -> Result<(bool, bool)> {
        let mut r = self.residual(tau, theta, level)?;
        let mut cost = max_abs(&r);
        let mut lambda = 1e-3;
        for _ in 0..MAX_ITERATIONS {
            if cost <= SOLVE_TOL {
                return Ok((true, false));
            }
            let mut jac = DMatrix::zeros(r.len(), free);
            for i in 0..free {
                let h = 1e-6 * (1.0 + theta[i].abs());
                let keep = theta[i];
                theta[i] = keep + h;
                let up = self.residual(tau, theta, level)?;
                theta[i] = keep - h;
                let down = self.residual(tau, theta, level)?;
                theta[i] = keep;
                for (row, (u, d)) in up.iter().zip(&down).enumerate() {
                    jac[(row, i)] = (u - d) / (2.0 * h);
                }
            }
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let g = &jt * DVector::from_column_slice(&r);
            let mut accepted = false;
            while lambda < 1e12 {
                let mut a = jtj.clone();
                for i in 0..free {
                    a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
                }
                let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = theta
                    .iter()
                    .enumerate()
                    .map(|(i, t)| if i < free { t + step[i] } else { *t })
                    .collect();
                let rt = self.residual(tau, &trial, level)?;
                if norm_sq(&rt) < norm_sq(&r) {
                    theta.copy_from_slice(&trial);
                    r = rt;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    break;
                }
                lambda *= 4.0;
            }
            let new_cost = max_abs(&r);
            if !accepted || (new_cost > 0.999 * cost && new_cost > 1e3 * SOLVE_TOL) {
                // stalled on a term no polynomial correction can remove
                return Ok((new_cost <= SOLVE_TOL, false));
            }
            cost = new_cost;
        }
        Ok((cost <= SOLVE_TOL, true))
    }

    /// Raises the contact order along `tau` one degree at a time.
    fn greedy(&self, tau: &[Complex64], cutoff: usize) -> Result<(Vec<CVec>, bool)> {
        let n = self.n;
        let mut theta = vec![0.0; 2 * n * (self.degree - 1)];
        let mut exhausted = false;
        for level in 3..=cutoff + 1 {
            if max_abs(&self.residual(tau, &theta, level)?) <= SOLVE_TOL {
                continue;
            }
            let free = 2 * n * (self.degree.min(level - 1) - 1);
            let mut trial = theta.clone();
            let (ok, cap) = self.solve(tau, &mut trial, free, level)?;
            exhausted |= cap;
            if !ok {
                break;
            }
            theta = trial;
        }
        Ok((self.disc(tau, &theta), exhausted))
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.abs()))
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// Unit tangential directions tried in `C^{n-1}`: coordinate axes, their
/// pairwise combinations with phases `1, i, -1, -i`, and a few seeded
/// random directions.
fn direction_grid(m: usize) -> Vec<CVec> {
    let zero = Complex64::new(0.0, 0.0);
    let mut out = Vec::new();
    for i in 0..m {
        let mut v = vec![zero; m];
        v[i] = Complex64::new(1.0, 0.0);
        out.push(v);
    }
    if m == 1 {
        return out;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..m {
        for j in i + 1..m {
            for w in [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, -1.0),
            ] {
                let mut v = vec![zero; m];
                v[i] = Complex64::new(s, 0.0);
                v[j] = w * s;
                out.push(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    out.extend(random_unitary(m, &mut rng).into_iter().take(8));
    out
}

/// Best contact order over polynomial discs of degree `<= degree` through
/// `P`, searched greedily along a grid of tangent directions. The result is
/// a lower bound for the type, certified by the returned witness disc.
pub fn geometric_type(
    spec: &DomainSpec,
    p: &BoundaryPoint,
    degree: usize,
    cutoff: usize,
    exec: Execution,
) -> Result<GeometricResult> {
    let rho = spec.require_rho()?;
    if degree < 1 || !(2..=DEFAULT_MAX_JET_ORDER - 1).contains(&cutoff) {
        return Err(Error::InvalidParameter(format!(
            "need degree >= 1 and cutoff in 2..={}",
            DEFAULT_MAX_JET_ORDER - 1
        )));
    }
    let nc = normalize_coordinates(spec, p)?;
    let search = Search {
        rho,
        center: nc.center.clone(),
        unitary: &nc.unitary,
        scale: nc.scale,
        n: spec.n,
        degree: degree.max(1),
    };
    let grid = direction_grid(spec.n - 1);
    let runs = map_slice(exec, &grid, |tau| -> Result<(TypeValue, AnalyticDisc, bool)> {
        let (coeffs, exhausted) = if degree >= 2 {
            search.greedy(tau, cutoff)?
        } else {
            (search.disc(tau, &[]), false)
        };
        let disc = AnalyticDisc::new(coeffs)?;
        Ok((contact_order(spec, &disc, cutoff)?, disc, exhausted))
    });
    let mut best: Option<(TypeValue, AnalyticDisc)> = None;
    let mut budget_exhausted = false;
    for run in runs {
        let (value, disc, exhausted) = run?;
        budget_exhausted |= exhausted;
        if best.as_ref().is_none_or(|(b, _)| value.rank() > b.rank()) {
            best = Some((value, disc));
        }
    }
    let (value, witness) = best.expect("direction grid is never empty");
    Ok(GeometricResult {
        value,
        direction: witness.derivative_at_zero(),
        witness,
        directions_tried: grid.len(),
        budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::parse_catalog_uri;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn contact_order_examples() {
        let spec = parse_catalog_uri("catalog:model_type_2k?k=2").unwrap();
        let axis = AnalyticDisc::linear(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(contact_order(&spec, &axis, 8).unwrap(), TypeValue::exact(4));
        // reparametrizations
        for d in [
            axis.precompose(Complex64::from_polar(1.0, 0.9)),
            axis.precompose(c(0.4, 0.0)),
        ] {
            assert_eq!(contact_order(&spec, &d, 8).unwrap(), TypeValue::exact(4));
        }
        let generic = AnalyticDisc::linear(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(1.0, 0.5)]).unwrap();
        assert_eq!(contact_order(&spec, &generic, 8).unwrap(), TypeValue::exact(1));
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        let tangent = AnalyticDisc::linear(vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(contact_order(&ball, &tangent, 8).unwrap(), TypeValue::exact(2));
        let singular = AnalyticDisc::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(contact_order(&ball, &singular, 8), Err(Error::SingularDisc)));
        let off = AnalyticDisc::linear(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(contact_order(&ball, &off, 8).is_err());
    }

    #[test]
    fn model_ladder_and_ball() {
        for k in 1..=3 {
            let spec = parse_catalog_uri(&format!("catalog:model_type_2k?k={k}")).unwrap();
            let p = BoundaryPoint::at(&spec, &[0.0; 4]).unwrap();
            let r = geometric_type(&spec, &p, 6, 8, Execution::default()).unwrap();
            assert_eq!(r.value, TypeValue::exact(2 * k));
        }
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        let p = BoundaryPoint::at(&ball, &[0.6, 0.0, 0.0, 0.8]).unwrap();
        let r = geometric_type(&ball, &p, 6, 8, Execution::default()).unwrap();
        assert_eq!(r.value, TypeValue::exact(2));
    }

    #[test]
    fn harmonic_terms_are_removed() {
        // 2 Re z2 + Re(z1^2) + |z1|^4 has type 4: the harmonic Re(z1^2) is
        // absorbed by the z2 component of the disc
        let rho = crate::expr::parse("2*re(z2) + re(z1)^2 - im(z1)^2 + absq(z1)^2").unwrap();
        let spec = DomainSpec::from_rho("tilted", 2, rho, crate::domain::default_box(2, 1.0)).unwrap();
        let p = BoundaryPoint::at(&spec, &[0.0; 4]).unwrap();
        let r = geometric_type(&spec, &p, 6, 8, Execution::Sequential).unwrap();
        assert_eq!(r.value, TypeValue::exact(4));
        assert_eq!(contact_order(&spec, &r.witness, 8).unwrap(), TypeValue::exact(4));
    }

    #[test]
    fn infinite_type_saturates() {
        let spec = parse_catalog_uri("catalog:infinite_type").unwrap();
        let p = BoundaryPoint::at(&spec, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let r = geometric_type(&spec, &p, 6, 12, Execution::default()).unwrap();
        assert_eq!(r.value, TypeValue::saturated(12));
    }
}
