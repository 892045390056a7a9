//! Domain specifications `{rho < 0}`, the built-in catalog, and metric
//! utilities (projection to the boundary, outward normal, boundary distance,
//! normalized coordinates).

mod catalog;
mod metric;
pub mod shape;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Tape};
use crate::linalg::{cmatvec_adjoint, norm, to_complex, CVec};

pub use catalog::{catalog_domain, parse_catalog_uri, CATALOG_NAMES};
pub use metric::{
    boundary_distance, boundary_project, nearest_boundary_point, nearest_boundary_point_from, normalize_coordinates,
    outward_normal, NormalizedCoordinates,
};
pub use shape::{PlaneSet, Shape};

/// Smallest gradient norm accepted at a boundary point.
pub const GRAD_FLOOR: f64 = 1e-6;
pub const DEFAULT_TOL_BOUNDARY: f64 = 1e-9;

struct SmoothData {
    rho: Expr,
    value_tape: Tape,
    /// `rho` followed by its gradient.
    tape: Tape,
    /// `rho`, its gradient and the upper triangle of its Hessian, row by row.
    second: OnceLock<Result<Tape>>,
}

#[derive(Clone)]
enum Geometry {
    Smooth(Arc<SmoothData>),
    Shape(Shape),
}

/// A domain `{rho < 0}` in `C^n`, or a non-smooth catalog domain described
/// by exact planar factors.
#[derive(Clone)]
pub struct DomainSpec {
    pub name: String,
    pub n: usize,
    pub bounding_box: Vec<[f64; 2]>,
    pub tol_boundary: f64,
    /// Parameters of a catalog entry, echoed in reports.
    pub params: BTreeMap<String, f64>,
    geometry: Geometry,
    catalog_uri: Option<String>,
}

impl std::fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomainSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("rho", &self.rho().map(|e| e.to_string()))
            .field("smooth", &self.smooth())
            .finish()
    }
}

/// Point classification against a tolerance band around the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// A point of the boundary together with the data certifying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub grad_norm: f64,
}

impl BoundaryPoint {
    /// Certifies `x` as a boundary point of `spec` without moving it.
    pub fn at(spec: &DomainSpec, x: &[f64]) -> Result<BoundaryPoint> {
        let (v, g) = spec.value_and_grad(x)?;
        let gn = norm(&g);
        if v.abs() > spec.tol_boundary {
            return Err(Error::InvalidParameter(format!(
                "point is not on the boundary: |rho| = {:e} exceeds {:e}",
                v.abs(),
                spec.tol_boundary
            )));
        }
        if gn < GRAD_FLOOR {
            return Err(Error::NotADefiningFunction(gn));
        }
        Ok(BoundaryPoint {
            coords: x.to_vec(),
            residual: v.abs(),
            grad_norm: gn,
        })
    }

    /// Uses `x` when it already lies on the boundary, projecting otherwise.
    pub fn locate(spec: &DomainSpec, x: &[f64]) -> Result<BoundaryPoint> {
        match BoundaryPoint::at(spec, x) {
            Ok(p) => Ok(p),
            Err(Error::InvalidParameter(_)) => boundary_project(spec, x),
            Err(e) => Err(e),
        }
    }

    pub fn complex(&self) -> CVec {
        to_complex(&self.coords)
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

fn run_tape(tape: &Tape, x: &[f64], out: &mut [f64]) -> Result<()> {
    SCRATCH.with(|s| tape.eval_with(x, &mut s.borrow_mut(), out))
}

pub(crate) fn upper_to_matrix(upper: &[f64], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            m[(i, j)] = upper[k];
            m[(j, i)] = upper[k];
            k += 1;
        }
    }
    m
}

pub(crate) fn default_box(n: usize, half: f64) -> Vec<[f64; 2]> {
    vec![[-half, half]; 2 * n]
}

impl DomainSpec {
    /// Smooth domain from a defining function over `2n` real variables.
    pub fn from_rho(name: impl Into<String>, n: usize, rho: Expr, bounding_box: Vec<[f64; 2]>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if bounding_box.len() != 2 * n || bounding_box.iter().any(|b| !(b[0] < b[1])) {
            return Err(Error::InvalidParameter(format!(
                "bounding box must list {} intervals [lo, hi] with lo < hi",
                2 * n
            )));
        }
        rho.check_vars(2 * n)?;
        let mut outs = vec![rho.clone()];
        outs.extend((0..2 * n).map(|i| rho.diff(i)));
        let tape = Tape::compile(&outs, 2 * n)?;
        let value_tape = Tape::compile(std::slice::from_ref(&rho), 2 * n)?;
        Ok(DomainSpec {
            name: name.into(),
            n,
            bounding_box,
            tol_boundary: DEFAULT_TOL_BOUNDARY,
            params: BTreeMap::new(),
            geometry: Geometry::Smooth(Arc::new(SmoothData {
                rho,
                value_tape,
                tape,
                second: OnceLock::new(),
            })),
            catalog_uri: None,
        })
    }

    pub(crate) fn from_shape(name: impl Into<String>, shape: Shape, bounding_box: Vec<[f64; 2]>) -> Self {
        DomainSpec {
            name: name.into(),
            n: shape.dim(),
            bounding_box,
            tol_boundary: DEFAULT_TOL_BOUNDARY,
            params: BTreeMap::new(),
            geometry: Geometry::Shape(shape),
            catalog_uri: None,
        }
    }

    pub fn with_tol_boundary(mut self, tol: f64) -> Self {
        self.tol_boundary = tol;
        self
    }

    pub fn smooth(&self) -> bool {
        matches!(self.geometry, Geometry::Smooth(_))
    }

    pub fn rho(&self) -> Option<&Expr> {
        match &self.geometry {
            Geometry::Smooth(d) => Some(&d.rho),
            Geometry::Shape(_) => None,
        }
    }

    /// The defining function, or `NotSmooth` for non-smooth entries.
    pub fn require_rho(&self) -> Result<&Expr> {
        self.rho().ok_or_else(|| Error::NotSmooth(self.name.clone()))
    }

    pub fn shape(&self) -> Option<&Shape> {
        match &self.geometry {
            Geometry::Shape(s) => Some(s),
            Geometry::Smooth(_) => None,
        }
    }

    pub fn catalog_uri(&self) -> Option<&str> {
        self.catalog_uri.as_deref()
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != 2 * self.n {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                2 * self.n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// `rho(x)` for smooth domains, the signed level otherwise. Negative
    /// exactly inside the domain.
    pub fn level(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        match &self.geometry {
            Geometry::Smooth(d) => {
                let mut out = [0.0];
                run_tape(&d.value_tape, x, &mut out)?;
                Ok(out[0])
            }
            Geometry::Shape(s) => Ok(s.level(&to_complex(x))),
        }
    }

    /// `rho(x)` and its gradient. Non-smooth domains are rejected.
    pub fn value_and_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_point(x)?;
        let d = match &self.geometry {
            Geometry::Smooth(d) => d,
            Geometry::Shape(_) => return Err(Error::NotSmooth(self.name.clone())),
        };
        let mut all = vec![0.0; 1 + 2 * self.n];
        run_tape(&d.tape, x, &mut all)?;
        let v = all[0];
        all.remove(0);
        Ok((v, all))
    }

    /// Writes `rho`, the gradient and the upper triangle of the Hessian
    /// (row by row) into `out`, which must hold `1 + d + d (d + 1) / 2`
    /// values for `d = 2n`.
    pub(crate) fn second_jet(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_point(x)?;
        let d = match &self.geometry {
            Geometry::Smooth(d) => d,
            Geometry::Shape(_) => return Err(Error::NotSmooth(self.name.clone())),
        };
        let dim = 2 * self.n;
        let tape = d
            .second
            .get_or_init(|| {
                let grad: Vec<Expr> = (0..dim).map(|i| d.rho.diff(i)).collect();
                let mut outs = Vec::with_capacity(1 + dim + dim * (dim + 1) / 2);
                outs.push(d.rho.clone());
                outs.extend(grad.iter().cloned());
                for (i, g) in grad.iter().enumerate() {
                    outs.extend((i..dim).map(|j| g.diff(j)));
                }
                Tape::compile(&outs, dim)
            })
            .as_ref()
            .map_err(Clone::clone)?;
        run_tape(tape, x, out)
    }

    /// Real Hessian of `rho` at `x`.
    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let dim = 2 * self.n;
        let mut vals = vec![0.0; 1 + dim + dim * (dim + 1) / 2];
        self.second_jet(x, &mut vals)?;
        Ok(upper_to_matrix(&vals[1 + dim..], dim))
    }

    /// Boundary band used by the disc tests: `tol * (1 + |grad rho(x)|)`.
    pub fn membership_tolerance(&self, x: &[f64], tol: f64) -> Result<f64> {
        match &self.geometry {
            Geometry::Smooth(_) => Ok(tol * (1.0 + norm(&self.value_and_grad(x)?.1))),
            // signed distances have unit gradient
            Geometry::Shape(_) => Ok(2.0 * tol),
        }
    }

    /// Classifies `x` with the given tolerance band around the boundary.
    pub fn classify(&self, x: &[f64], tol: f64) -> Result<Membership> {
        let v = self.level(x)?;
        Ok(if v < -tol {
            Membership::Interior
        } else if v > tol {
            Membership::Exterior
        } else {
            Membership::Boundary
        })
    }

    /// Classification with the spec's own `tol_boundary`.
    pub fn membership(&self, x: &[f64]) -> Result<Membership> {
        self.classify(x, self.tol_boundary)
    }

    /// Uniform point of the bounding box.
    pub fn sample_box<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.bounding_box.iter().map(|b| rng.random_range(b[0]..b[1])).collect()
    }

    /// Rejection-samples an interior point; `None` after `attempts` misses.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, attempts: usize) -> Option<Vec<f64>> {
        for _ in 0..attempts {
            let x = self.sample_box(rng);
            if matches!(self.membership(&x), Ok(Membership::Interior)) {
                return Some(x);
            }
        }
        None
    }

    /// The same domain with `rho` multiplied by a factor positive on the
    /// bounding box.
    pub fn rescaled(&self, factor: &Expr) -> Result<DomainSpec> {
        let rho = self.require_rho()?;
        let mut out = DomainSpec::from_rho(
            format!("{}*factor", self.name),
            self.n,
            rho * factor,
            self.bounding_box.clone(),
        )?;
        out.tol_boundary = self.tol_boundary;
        Ok(out)
    }

    /// Image `U(Omega)` under a unitary `U` given by rows: the new defining
    /// function is `rho(U^* z)`.
    pub fn unitary_image(&self, rows: &[CVec]) -> Result<DomainSpec> {
        let rho = self.require_rho()?;
        let zero = vec![Complex64::new(0.0, 0.0); self.n];
        let new_rho = substitute_affine(rho, &zero, rows, self.n)?;
        let radius = self
            .bounding_box
            .iter()
            .map(|b| b[0].abs().max(b[1].abs()).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut out = DomainSpec::from_rho(
            format!("{}@unitary", self.name),
            self.n,
            new_rho,
            default_box(self.n, radius),
        )?;
        out.tol_boundary = self.tol_boundary;
        Ok(out)
    }

    pub fn to_json(&self) -> DomainSpecJson {
        DomainSpecJson {
            name: self.name.clone(),
            n: self.n,
            rho: self.rho().map(|e| e.to_string()),
            bounding_box: self.bounding_box.clone(),
            tol_boundary: self.tol_boundary,
            smooth: self.smooth(),
            catalog: self.catalog_uri.clone(),
        }
    }

    pub fn from_json(j: &DomainSpecJson) -> Result<DomainSpec> {
        let mut spec = match (&j.rho, &j.catalog) {
            (Some(src), _) => DomainSpec::from_rho(j.name.clone(), j.n, parse(src)?, j.bounding_box.clone())?,
            (None, Some(uri)) => {
                let mut s = parse_catalog_uri(uri)?;
                s.name = j.name.clone();
                s
            }
            (None, None) => {
                return Err(Error::Json("domain spec needs either \"rho\" or \"catalog\"".into()));
            }
        };
        if spec.n != j.n {
            return Err(Error::Json(format!(
                "declared n = {} but the domain has n = {}",
                j.n, spec.n
            )));
        }
        if j.smooth != spec.smooth() {
            return Err(Error::Json("\"smooth\" flag disagrees with the domain".into()));
        }
        if !(j.tol_boundary > 0.0) {
            return Err(Error::Json("tol_boundary must be positive".into()));
        }
        spec.tol_boundary = j.tol_boundary;
        Ok(spec)
    }

    /// Loads a spec from a catalog URI or a JSON file path.
    pub fn load(source: &str) -> Result<DomainSpec> {
        if source.starts_with("catalog:") {
            return parse_catalog_uri(source);
        }
        let text = std::fs::read_to_string(source)
            .map_err(|e| Error::InvalidParameter(format!("cannot read '{source}': {e}")))?;
        let j: DomainSpecJson = serde_json::from_str(&text)?;
        DomainSpec::from_json(&j)
    }
}

/// Serialized form of a [`DomainSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpecJson {
    pub name: String,
    pub n: usize,
    /// Expression string; absent for non-smooth catalog entries.
    #[serde(default)]
    pub rho: Option<String>,
    pub bounding_box: Vec<[f64; 2]>,
    #[serde(default = "default_tol")]
    pub tol_boundary: f64,
    pub smooth: bool,
    /// Catalog URI reconstructing a non-smooth entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
}

fn default_tol() -> f64 {
    DEFAULT_TOL_BOUNDARY
}

/// `e(c + U^* w)` as an expression in the real coordinates of `w`.
pub(crate) fn substitute_affine(e: &Expr, center: &[Complex64], rows: &[CVec], n: usize) -> Result<Expr> {
    let mut vars = Vec::with_capacity(2 * n);
    for j in 0..n {
        // z_j = c_j + sum_k conj(U_kj) w_k
        let mut re = Expr::constant(center[j].re);
        let mut im = Expr::constant(center[j].im);
        for (k, row) in rows.iter().enumerate() {
            let a = row[j].conj();
            let (u, v) = (Expr::re_z(k), Expr::im_z(k));
            re = re + (&u * a.re) - (&v * a.im);
            im = im + (&v * a.re) + (&u * a.im);
        }
        vars.push(re);
        vars.push(im);
    }
    e.substitute(&vars)
}

/// Maps normalized coordinates back: `z = c + U^* w`.
pub(crate) fn affine_inverse(center: &[Complex64], rows: &[CVec], w: &[Complex64]) -> CVec {
    cmatvec_adjoint(rows, w)
        .iter()
        .zip(center)
        .map(|(a, c)| a + c)
        .collect()
}
