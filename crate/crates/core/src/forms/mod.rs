//! Tangent frames, the restricted real Hessian and Levi forms, pointwise
//! classification, and the sampled Hartogs test.

mod hartogs;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryPoint, DomainSpec, GRAD_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{
    complex_orthonormal_complement, frobenius, hermitian_eigenvalues, norm, orthonormal_complement,
    symmetric_eigenvalues, CVec,
};

pub use hartogs::{hartogs_check, HartogsConfig, HartogsReport, HartogsViolation, DEFECT_REL_TOL};

pub const DEFAULT_TOL_EIG: f64 = 1e-8;

/// Real and complex tangent bases at a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    pub point: BoundaryPoint,
    /// `2n - 1` orthonormal vectors orthogonal to `grad rho(P)`.
    pub real_basis: Vec<Vec<f64>>,
    /// `n - 1` orthonormal vectors `xi` with `sum_j rho_{z_j}(P) xi_j = 0`.
    pub complex_basis: Vec<CVec>,
}

/// `(rho_{z_1}, .., rho_{z_n})` from the real gradient.
pub fn wirtinger_gradient(g: &[f64]) -> CVec {
    g.chunks(2).map(|p| Complex64::new(p[0], -p[1]) * 0.5).collect()
}

pub fn tangent_frame(spec: &DomainSpec, p: &BoundaryPoint) -> Result<TangentFrame> {
    let (_, g) = spec.value_and_grad(&p.coords)?;
    let gn = norm(&g);
    if gn < GRAD_FLOOR {
        return Err(Error::DegenerateGradient(gn));
    }
    let gz = wirtinger_gradient(&g);
    // sum_j gz_j xi_j = <conj(gz), xi>
    let normal: CVec = gz.iter().map(|c| c.conj()).collect();
    Ok(TangentFrame {
        point: p.clone(),
        real_basis: orthonormal_complement(&g),
        complex_basis: complex_orthonormal_complement(&normal),
    })
}

impl TangentFrame {
    /// The same tangent spaces with bases changed by an orthogonal matrix
    /// (real part) and a unitary matrix (complex part), both given by rows.
    pub fn rebased(&self, orth: &[Vec<f64>], unitary: &[CVec]) -> TangentFrame {
        let real_basis = orth
            .iter()
            .map(|row| {
                let mut v = vec![0.0; self.point.coords.len()];
                for (c, b) in row.iter().zip(&self.real_basis) {
                    v.iter_mut().zip(b).for_each(|(vi, bi)| *vi += c * bi);
                }
                v
            })
            .collect();
        let complex_basis = unitary
            .iter()
            .map(|row| {
                let mut v = vec![Complex64::new(0.0, 0.0); self.point.coords.len() / 2];
                for (c, b) in row.iter().zip(&self.complex_basis) {
                    v.iter_mut().zip(b).for_each(|(vi, bi)| *vi += c * bi);
                }
                v
            })
            .collect();
        TangentFrame {
            point: self.point.clone(),
            real_basis,
            complex_basis,
        }
    }
}

/// Complex Hessian `rho_{z_j zbar_k}` assembled from the real Hessian:
/// `(rho_{x_j x_k} + rho_{y_j y_k} + i (rho_{x_j y_k} - rho_{y_j x_k})) / 4`.
pub fn complex_hessian(h: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = h.nrows() / 2;
    DMatrix::from_fn(n, n, |j, k| {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        Complex64::new(h[(xj, xk)] + h[(yj, yk)], h[(xj, yk)] - h[(yj, xk)]) * 0.25
    })
}

/// `M_ab = sum_jk rho_{x_j x_k}(P) w^a_j w^b_k` over the real tangent basis.
pub fn hessian_form(spec: &DomainSpec, frame: &TangentFrame) -> Result<DMatrix<f64>> {
    let h = spec.hessian(&frame.point.coords)?;
    let w = &frame.real_basis;
    let m = w.len();
    let mut out = DMatrix::zeros(m, m);
    for a in 0..m {
        let hw = &h * nalgebra::DVector::from_column_slice(&w[a]);
        for b in a..m {
            let v: f64 = hw.iter().zip(&w[b]).map(|(x, y)| x * y).sum();
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok(out)
}

/// `L_ab = sum_jk rho_{z_j zbar_k}(P) xi^a_j conj(xi^b_k)` over the complex
/// tangent basis.
pub fn levi_form(spec: &DomainSpec, frame: &TangentFrame) -> Result<DMatrix<Complex64>> {
    let c = complex_hessian(&spec.hessian(&frame.point.coords)?);
    let xi = &frame.complex_basis;
    let m = xi.len();
    let n = c.nrows();
    let mut out = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for a in 0..m {
        for b in a..m {
            let mut v = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for k in 0..n {
                    v += c[(j, k)] * xi[a][j] * xi[b][k].conj();
                }
            }
            out[(a, b)] = v;
            out[(b, a)] = v.conj();
        }
        out[(a, a)].im = 0.0;
    }
    Ok(out)
}

/// Pointwise convexity and pseudoconvexity data at a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormReport {
    pub point: BoundaryPoint,
    /// Row-major.
    pub hessian_restricted: Vec<Vec<f64>>,
    /// Row-major `[re, im]` pairs.
    pub levi_restricted: Vec<Vec<[f64; 2]>>,
    /// Ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Ascending.
    pub levi_eigenvalues: Vec<f64>,
    pub min_hessian_eigenvalue: Option<f64>,
    pub min_levi_eigenvalue: Option<f64>,
    pub convex: bool,
    pub strictly_convex: bool,
    pub levi_pseudoconvex: bool,
    pub strictly_pseudoconvex: bool,
    pub tol_eig: f64,
    /// Effective thresholds `tol_eig * (1 + |M|)`.
    pub hessian_threshold: f64,
    pub levi_threshold: f64,
}

/// Classifies `P` from the restricted forms, using
/// `tol_eig * (1 + |M|_F)` as the PSD threshold for each matrix.
pub fn classify_point(spec: &DomainSpec, p: &BoundaryPoint, tol_eig: f64) -> Result<FormReport> {
    let frame = tangent_frame(spec, p)?;
    classify_with_frame(spec, &frame, tol_eig)
}

pub fn classify_with_frame(spec: &DomainSpec, frame: &TangentFrame, tol_eig: f64) -> Result<FormReport> {
    if !(tol_eig >= 0.0) {
        return Err(Error::InvalidParameter("tol_eig must be non-negative".into()));
    }
    let hm = hessian_form(spec, frame)?;
    let lm = levi_form(spec, frame)?;
    let he = symmetric_eigenvalues(&hm);
    let le = hermitian_eigenvalues(&lm);
    let ht = tol_eig * (1.0 + frobenius(&hm));
    let lt = tol_eig * (1.0 + frobenius(&lm));
    let hmin = he.first().copied();
    let lmin = le.first().copied();
    let at_least = |m: Option<f64>, t: f64| m.is_none_or(|v| v >= t);
    Ok(FormReport {
        point: frame.point.clone(),
        hessian_restricted: (0..hm.nrows()).map(|i| hm.row(i).iter().copied().collect()).collect(),
        levi_restricted: (0..lm.nrows())
            .map(|i| lm.row(i).iter().map(|c| [c.re, c.im]).collect())
            .collect(),
        hessian_eigenvalues: he,
        levi_eigenvalues: le,
        min_hessian_eigenvalue: hmin,
        min_levi_eigenvalue: lmin,
        convex: at_least(hmin, -ht),
        strictly_convex: at_least(hmin, ht),
        levi_pseudoconvex: at_least(lmin, -lt),
        strictly_pseudoconvex: at_least(lmin, lt),
        tol_eig,
        hessian_threshold: ht,
        levi_threshold: lt,
    })
}
