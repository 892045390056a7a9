//! Projection to the boundary, outward normals, boundary distance and
//! normalized coordinates.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{affine_inverse, default_box, substitute_affine, BoundaryPoint, DomainSpec, GRAD_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{cmatvec, complex_orthonormal_complement, dot, norm, orthonormal_complement, to_complex, CVec};

const MAX_ITER: usize = 50;
const MAX_REFINE: usize = 200;

/// Newton iteration along the gradient, `x <- x - rho grad / |grad|^2`, until
/// `|rho| <= tol_boundary`; then a few more steps polish the residual.
pub fn boundary_project(spec: &DomainSpec, x: &[f64]) -> Result<BoundaryPoint> {
    spec.require_rho()?;
    let mut p = x.to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let (v, g) = spec.value_and_grad(&p)?;
        let gn = norm(&g);
        if gn < GRAD_FLOOR {
            return Err(Error::DegenerateGradient(gn));
        }
        if v.abs() <= spec.tol_boundary {
            return polish(spec, p, v, g);
        }
        last = v.abs();
        let s = v / (gn * gn);
        p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi -= s * gi);
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        residual: last,
    })
}

fn polish(spec: &DomainSpec, mut p: Vec<f64>, mut v: f64, mut g: Vec<f64>) -> Result<BoundaryPoint> {
    for _ in 0..4 {
        if v == 0.0 {
            break;
        }
        let gn2 = dot(&g, &g);
        let q: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi - v / gn2 * gi).collect();
        let (vq, gq) = spec.value_and_grad(&q)?;
        if vq.abs() >= v.abs() {
            break;
        }
        p = q;
        v = vq;
        g = gq;
    }
    let gn = norm(&g);
    if gn < GRAD_FLOOR {
        return Err(Error::NotADefiningFunction(gn));
    }
    Ok(BoundaryPoint {
        coords: p,
        residual: v.abs(),
        grad_norm: gn,
    })
}

/// Unit outward normal `grad rho / |grad rho|` at a boundary point.
pub fn outward_normal(spec: &DomainSpec, p: &BoundaryPoint) -> Result<Vec<f64>> {
    let (_, g) = spec.value_and_grad(&p.coords)?;
    let gn = norm(&g);
    if gn < GRAD_FLOOR {
        return Err(Error::DegenerateGradient(gn));
    }
    Ok(g.iter().map(|x| x / gn).collect())
}

fn initial_projection(spec: &DomainSpec, x: &[f64]) -> Result<BoundaryPoint> {
    match boundary_project(spec, x) {
        Err(Error::DegenerateGradient(_)) => {
            // e.g. the centre of a ball; restart from a nearby point
            let scale = spec.bounding_box.iter().map(|b| b[1] - b[0]).fold(0.0f64, f64::max);
            let start: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, v)| v + 1e-3 * scale / (1.0 + i as f64))
                .collect();
            boundary_project(spec, &start)
        }
        other => other,
    }
}

/// Slides a boundary point towards the foot of the perpendicular from `x`:
/// the tangential part of `x - p` is added to `p` and the result projected
/// again, with step halving whenever the distance would grow. Stops when
/// `x - p` is normal to the boundary.
fn slide_to_nearest(spec: &DomainSpec, x: &[f64], mut p: BoundaryPoint) -> Result<BoundaryPoint> {
    let dist = |q: &[f64]| norm(&x.iter().zip(q).map(|(a, b)| a - b).collect::<Vec<_>>());
    let mut d = dist(&p.coords);
    for _ in 0..MAX_REFINE {
        let (_, g) = spec.value_and_grad(&p.coords)?;
        let gn = norm(&g);
        let diff: Vec<f64> = x.iter().zip(&p.coords).map(|(a, b)| a - b).collect();
        let along = dot(&diff, &g) / (gn * gn);
        let tang: Vec<f64> = diff.iter().zip(&g).map(|(di, gi)| di - along * gi).collect();
        if norm(&tang) <= 1e-14 * (1.0 + d) {
            break;
        }
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-6 {
            let q: Vec<f64> = p.coords.iter().zip(&tang).map(|(pi, ti)| pi + step * ti).collect();
            if let Ok(cand) = boundary_project(spec, &q) {
                let dc = dist(&cand.coords);
                if dc <= d {
                    moved = dc < d;
                    p = cand;
                    d = dc;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(p)
}

/// Closest boundary point to `x` for a smooth domain: a tangential slide
/// from the Newton projection, followed by probes along each tangent direction, so
/// that saddle points of the distance (e.g. the vertex of a paraboloid seen
/// from far along its axis) are escaped.
pub fn nearest_boundary_point(spec: &DomainSpec, x: &[f64]) -> Result<BoundaryPoint> {
    let p0 = initial_projection(spec, x)?;
    let dist = |q: &[f64]| norm(&x.iter().zip(q).map(|(a, b)| a - b).collect::<Vec<_>>());
    if let Some(p) = lagrange_newton(spec, x, &p0)? {
        if dist(&p.coords) <= dist(&p0.coords) * (1.0 + 1e-12) {
            return Ok(p);
        }
    }
    let mut p = slide_to_nearest(spec, x, p0)?;
    for _ in 0..3 {
        if is_strict_local_min(spec, x, &p)? {
            break;
        }
        let d = dist(&p.coords);
        let (_, g) = spec.value_and_grad(&p.coords)?;
        let h = 1e-3 * (1.0 + d);
        let mut better = None;
        'probe: for t in orthonormal_complement(&g) {
            for sgn in [1.0, -1.0] {
                let q: Vec<f64> = p.coords.iter().zip(&t).map(|(a, b)| a + sgn * h * b).collect();
                if let Ok(c) = boundary_project(spec, &q) {
                    if dist(&c.coords) < d * (1.0 - 1e-12) {
                        better = Some(c);
                        break 'probe;
                    }
                }
            }
        }
        match better {
            Some(c) => p = slide_to_nearest(spec, x, c)?,
            None => break,
        }
    }
    Ok(p)
}

/// Newton's method on the critical-point system `p - x + lambda grad rho(p) = 0`,
/// `rho(p) = 0`. Returns the critical point when it converges quickly and is
/// a strict local minimum of the distance; `None` sends the caller to
/// [`slide_to_nearest`].
fn lagrange_newton(spec: &DomainSpec, x: &[f64], p0: &BoundaryPoint) -> Result<Option<BoundaryPoint>> {
    let d = x.len();
    let mut jet = vec![0.0; 1 + d + d * (d + 1) / 2];
    let mut p = p0.coords.clone();
    spec.second_jet(&p, &mut jet)?;
    let g0 = &jet[1..=d];
    let mut lambda = x.iter().zip(&p).zip(g0).map(|((a, b), g)| (a - b) * g).sum::<f64>() / dot(g0, g0);
    let scale = 1.0 + norm(x);
    let w = d + 2;
    let mut sys = vec![0.0; (d + 1) * w];
    for it in 0..12 {
        if it > 0 {
            spec.second_jet(&p, &mut jet)?;
        }
        let v = jet[0];
        let (g, upper) = jet[1..].split_at(d);
        let mut k = 0;
        for i in 0..d {
            sys[i * w + i] = 1.0 + lambda * upper[k];
            k += 1;
            for j in i + 1..d {
                sys[i * w + j] = lambda * upper[k];
                sys[j * w + i] = lambda * upper[k];
                k += 1;
            }
            sys[i * w + d] = g[i];
            sys[d * w + i] = g[i];
            sys[i * w + d + 1] = x[i] - p[i] - lambda * g[i];
        }
        sys[d * w + d] = 0.0;
        sys[d * w + d + 1] = -v;
        let res = (0..=d).map(|i| sys[i * w + d + 1].powi(2)).sum::<f64>().sqrt();
        if res <= 1e-13 * scale && v.abs() <= spec.tol_boundary {
            let gn = norm(g);
            if gn < GRAD_FLOOR || !tangent_positive(g, upper, lambda) {
                return Ok(None);
            }
            return Ok(Some(BoundaryPoint {
                coords: p,
                residual: v.abs(),
                grad_norm: gn,
            }));
        }
        if !solve_in_place(&mut sys, d + 1) {
            return Ok(None);
        }
        for i in 0..d {
            p[i] += sys[i * w + d + 1];
        }
        lambda += sys[d * w + d + 1];
        if p.iter().any(|v| !v.is_finite()) || !lambda.is_finite() || spec.check_point(&p).is_err() {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Gaussian elimination with partial pivoting on the row-major augmented
/// matrix `[A | b]` of size `m x (m + 1)`; the solution replaces `b`.
fn solve_in_place(a: &mut [f64], m: usize) -> bool {
    let w = m + 1;
    for c in 0..m {
        let mut piv = c;
        for r in c + 1..m {
            if a[r * w + c].abs() > a[piv * w + c].abs() {
                piv = r;
            }
        }
        if a[piv * w + c].abs() < 1e-300 {
            return false;
        }
        if piv != c {
            for k in 0..w {
                a.swap(c * w + k, piv * w + k);
            }
        }
        let inv = 1.0 / a[c * w + c];
        for r in c + 1..m {
            let f = a[r * w + c] * inv;
            if f != 0.0 {
                for k in c..w {
                    a[r * w + k] -= f * a[c * w + k];
                }
            }
        }
    }
    for c in (0..m).rev() {
        let mut s = a[c * w + m];
        for k in c + 1..m {
            s -= a[c * w + k] * a[k * w + m];
        }
        a[c * w + m] = s / a[c * w + c];
    }
    true
}

/// [`nearest_boundary_point`] warm-started from a boundary point `hint`
/// near the answer, e.g. the foot point of a nearby query. The result is
/// accepted only if it is a strict local minimum of the distance and no
/// farther than `hint` itself; otherwise the full search runs.
pub fn nearest_boundary_point_from(spec: &DomainSpec, x: &[f64], hint: &BoundaryPoint) -> Result<BoundaryPoint> {
    let dist = |q: &[f64]| norm(&x.iter().zip(q).map(|(a, b)| a - b).collect::<Vec<_>>());
    if let Some(p) = lagrange_newton(spec, x, hint)? {
        if dist(&p.coords) <= dist(&hint.coords) * (1.0 + 1e-12) {
            return Ok(p);
        }
    }
    nearest_boundary_point(spec, x)
}

/// Second-order test at a critical point `p` of `q -> |x - q|^2 / 2` on the
/// boundary: the Lagrangian Hessian `I + lambda Hess rho`, with
/// `lambda = (x - p).grad / |grad|^2`, must be positive on the tangent space.
fn is_strict_local_min(spec: &DomainSpec, x: &[f64], p: &BoundaryPoint) -> Result<bool> {
    let d = x.len();
    let mut jet = vec![0.0; 1 + d + d * (d + 1) / 2];
    spec.second_jet(&p.coords, &mut jet)?;
    let (g, upper) = jet[1..].split_at(d);
    let lambda = x
        .iter()
        .zip(&p.coords)
        .zip(g)
        .map(|((a, b), g)| (a - b) * g)
        .sum::<f64>()
        / dot(g, g);
    Ok(tangent_positive(g, upper, lambda))
}

/// Whether `I + lambda H` exceeds `1e-8` on the orthogonal complement of
/// `g`, with `H` given by its upper triangle.
fn tangent_positive(g: &[f64], upper: &[f64], lambda: f64) -> bool {
    let d = g.len();
    let h = super::upper_to_matrix(upper, d);
    // Gershgorin: positive on the whole space settles it
    let row_sum = (0..d)
        .map(|i| h.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if lambda.abs() * row_sum < 1.0 - 1e-8 {
        return true;
    }
    let basis = orthonormal_complement(g);
    let m = basis.len();
    let mut red = DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        let hb = &h * nalgebra::DVector::from_column_slice(&basis[a]);
        for b in a..m {
            let v =
                dot(&basis[a], &basis[b]) + lambda * dot(hb.as_slice(), &basis[b]) - if a == b { 1e-8 } else { 0.0 };
            red[(a, b)] = v;
            red[(b, a)] = v;
        }
    }
    // positive definite above the margin iff the shifted matrix factors
    m == 0 || red.cholesky().is_some()
}

/// Distance from `x` to the boundary. Smooth domains use
/// [`nearest_boundary_point`]; catalog products use their exact level.
pub fn boundary_distance(spec: &DomainSpec, x: &[f64]) -> Result<f64> {
    if spec.shape().is_some() {
        return Ok(spec.level(x)?.abs());
    }
    if spec.level(x)?.abs() <= spec.tol_boundary {
        if let Ok(p) = BoundaryPoint::at(spec, x) {
            return Ok(p.residual / p.grad_norm);
        }
    }
    let p = nearest_boundary_point(spec, x)?;
    Ok(norm(&x.iter().zip(&p.coords).map(|(a, b)| a - b).collect::<Vec<_>>()))
}

/// Affine-unitary change of variables `w = U (z - c)` with `rho` rescaled so
/// that the transformed defining function reads `2 Re w_n + O(|w|^2)` at 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalizedCoordinates {
    pub center: CVec,
    /// Rows of `U`; the last row is the normalized `(rho_z1, .., rho_zn)(P)`.
    pub unitary: Vec<CVec>,
    /// Positive factor applied to `rho`, equal to `2 / |grad rho(P)|`.
    pub scale: f64,
    #[serde(skip)]
    pub spec: Option<DomainSpec>,
}

impl NormalizedCoordinates {
    pub fn to_normalized(&self, z: &[Complex64]) -> CVec {
        let d: CVec = z.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        cmatvec(&self.unitary, &d)
    }

    pub fn from_normalized(&self, w: &[Complex64]) -> CVec {
        affine_inverse(&self.center, &self.unitary, w)
    }

    /// The transformed domain.
    pub fn domain(&self) -> &DomainSpec {
        self.spec.as_ref().expect("normalized domain present")
    }
}

/// Translates `P` to 0, rotates the complex normal onto the `z_n` axis and
/// rescales `rho` so that the coefficient of `Re w_n` is 2.
pub fn normalize_coordinates(spec: &DomainSpec, p: &BoundaryPoint) -> Result<NormalizedCoordinates> {
    let rho = spec.require_rho()?;
    let (_, g) = spec.value_and_grad(&p.coords)?;
    let gn = norm(&g);
    if gn < GRAD_FLOOR {
        return Err(Error::DegenerateGradient(gn));
    }
    let n = spec.n;
    // rho_{z_j} = (rho_x - i rho_y) / 2
    let gz: CVec = (0..n).map(|j| Complex64::new(g[2 * j], -g[2 * j + 1]) * 0.5).collect();
    let gzn = gz.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut rows = complex_orthonormal_complement(&gz);
    rows.push(gz.iter().map(|c| c / gzn).collect());
    let scale = 1.0 / gzn;
    let center = to_complex(&p.coords);
    let new_rho = scale * substitute_affine(rho, &center, &rows, n)?;
    let radius = spec
        .bounding_box
        .iter()
        .zip(&p.coords)
        .map(|(b, c)| (b[0] - c).abs().max((b[1] - c).abs()).powi(2))
        .sum::<f64>()
        .sqrt();
    let mut out = DomainSpec::from_rho(format!("{}@normalized", spec.name), n, new_rho, default_box(n, radius))?;
    out.tol_boundary = spec.tol_boundary;
    Ok(NormalizedCoordinates {
        center,
        unitary: rows,
        scale,
        spec: Some(out),
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_catalog_uri;
    use super::*;
    use crate::expr::{curve_jet, PolyCurve};

    #[test]
    fn projection_examples() {
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        let p = boundary_project(&ball, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((p.coords[0] - 1.0).abs() < 1e-12 && p.coords[1..].iter().all(|c| *c == 0.0));
        let on = boundary_project(&ball, &[0.6, 0.8, 0.0, 0.0]).unwrap();
        assert_eq!(on.coords, vec![0.6, 0.8, 0.0, 0.0]);
        let m = parse_catalog_uri("catalog:model_type_2k?k=1").unwrap();
        let q = boundary_project(&m, &[0.0, 0.0, -0.1, 0.0]).unwrap();
        assert!(q.coords.iter().all(|c| c.abs() < 1e-15));
        assert!(matches!(
            boundary_project(&ball, &[0.0; 4]),
            Err(Error::DegenerateGradient(_))
        ));
    }

    #[test]
    fn normals() {
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        let p = BoundaryPoint::at(&ball, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(outward_normal(&ball, &p).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        let m = parse_catalog_uri("catalog:model_type_2k?k=2").unwrap();
        let o = BoundaryPoint::at(&m, &[0.0; 4]).unwrap();
        assert_eq!(outward_normal(&m, &o).unwrap(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn distances() {
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        assert!((boundary_distance(&ball, &[0.0; 4]).unwrap() - 1.0).abs() < 1e-12);
        assert!((boundary_distance(&ball, &[0.5, 0.0, 0.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!((boundary_distance(&ball, &[0.1, 0.2, -0.3, 0.1]).unwrap() - (1.0 - 0.15f64.sqrt())).abs() < 1e-12);
        let a = parse_catalog_uri("catalog:annulus_times_disc").unwrap();
        assert_eq!(boundary_distance(&a, &[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.5);
        // model surface x3 = -|z1|^2 / 2 is a paraboloid; the nearest point of
        // (0, 0, -1, 0) is not the vertical projection
        let m = parse_catalog_uri("catalog:model_type_2k?k=1").unwrap();
        let d = boundary_distance(&m, &[0.0, 0.0, -1.0, 0.0]).unwrap();
        // minimize r^2 + (1 - r^2/2)^2: r^2 = 0 is optimal with d = 1
        assert!((d - 1.0).abs() < 1e-10, "{d}");
        let d2 = boundary_distance(&m, &[0.0, 0.0, -3.0, 0.0]).unwrap();
        // r^2 + (3 - r^2/2)^2 minimal at r^2 = 4: d^2 = 4 + 1 = 5
        assert!((d2 - 5.0f64.sqrt()).abs() < 1e-9, "{d2}");
    }

    #[test]
    fn model_is_already_normal() {
        let m = parse_catalog_uri("catalog:model_type_2k?k=2").unwrap();
        let o = BoundaryPoint::at(&m, &[0.0; 4]).unwrap();
        let nc = normalize_coordinates(&m, &o).unwrap();
        assert_eq!(nc.scale, 1.0);
        for (i, r) in nc.unitary.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_eq!(*c, Complex64::new(e, 0.0));
            }
        }
        let x = [0.3, 0.1, -0.2, 0.05];
        assert!((nc.domain().level(&x).unwrap() - m.level(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn sphere_normal_form() {
        let ball = parse_catalog_uri("catalog:ball").unwrap();
        for pt in [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]] {
            let p = BoundaryPoint::at(&ball, &pt).unwrap();
            let nc = normalize_coordinates(&ball, &p).unwrap();
            let d = nc.domain();
            let (v, g) = d.value_and_grad(&[0.0; 4]).unwrap();
            assert!(v.abs() < 1e-15);
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12 && g[3].abs() < 1e-12);
            assert!((g[2] - 2.0).abs() < 1e-12);
            // along w1 = t: rho = t^2
            let jet = curve_jet(
                d.rho().unwrap(),
                &PolyCurve::new(vec![vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]]),
                4,
            )
            .unwrap();
            assert!((jet.coeffs[2] - 1.0).abs() < 1e-12 && jet.coeffs[1].abs() < 1e-12);
        }
    }
}
