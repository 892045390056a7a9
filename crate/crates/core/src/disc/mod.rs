//! Polynomial analytic discs, harmonic discs, containment tests, random
//! small-disc searches and disc sequences pushed into a domain.

mod containment;
mod harmonic;
mod sequence;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cnorm, to_real, CVec};

pub use containment::{
    disc_containment_test, extreme_witness_check, small_disc_search, ContainmentResult, ContainmentVariant,
    Counterexample, DiscTestConfig, ExtremeWitness, SmallDiscReport, Verdict,
};
pub use harmonic::HarmonicDisc;
pub use sequence::{
    kontinuitats_sequence, limit_tangent_direction, DiscSequenceReport, ExponentFit, SequenceConfig, SequenceRecord,
    TangentDirection,
};

/// `psi(zeta) = sum_k a_k zeta^k` on the closed unit disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscJson", into = "DiscJson")]
pub struct AnalyticDisc {
    coeffs: Vec<CVec>,
}

#[derive(Serialize, Deserialize)]
struct DiscJson {
    degree: usize,
    coeffs: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<DiscJson> for AnalyticDisc {
    type Error = Error;

    fn try_from(j: DiscJson) -> Result<Self> {
        if j.coeffs.len() != j.degree + 1 {
            return Err(Error::InvalidParameter(format!(
                "degree {} needs {} coefficient vectors, got {}",
                j.degree,
                j.degree + 1,
                j.coeffs.len()
            )));
        }
        AnalyticDisc::new(
            j.coeffs
                .into_iter()
                .map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        )
    }
}

impl From<AnalyticDisc> for DiscJson {
    fn from(d: AnalyticDisc) -> Self {
        DiscJson {
            degree: d.degree(),
            coeffs: d
                .coeffs
                .iter()
                .map(|v| v.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }
}

impl AnalyticDisc {
    pub fn new(coeffs: Vec<CVec>) -> Result<Self> {
        let n = coeffs.first().map_or(0, Vec::len);
        if n == 0 || coeffs.iter().any(|a| a.len() != n) {
            return Err(Error::InvalidParameter(
                "a disc needs at least one coefficient vector, all of the same positive length".into(),
            ));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("disc coefficients must be finite".into()));
        }
        Ok(AnalyticDisc { coeffs })
    }

    /// `zeta -> center + zeta * direction`.
    pub fn linear(center: CVec, direction: CVec) -> Result<Self> {
        AnalyticDisc::new(vec![center, direction])
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn coeffs(&self) -> &[CVec] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn center(&self) -> &CVec {
        &self.coeffs[0]
    }

    /// `psi'(0)`.
    pub fn derivative_at_zero(&self) -> CVec {
        self.coeffs
            .get(1)
            .cloned()
            .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.dim()])
    }

    pub fn is_nonsingular(&self) -> bool {
        cnorm(&self.derivative_at_zero()) > 0.0
    }

    pub fn eval(&self, zeta: Complex64) -> CVec {
        // Horner
        let mut acc = self.coeffs[self.degree()].clone();
        for a in self.coeffs.iter().rev().skip(1) {
            acc.iter_mut().zip(a).for_each(|(s, c)| *s = *s * zeta + c);
        }
        acc
    }

    pub fn eval_real(&self, zeta: Complex64) -> Vec<f64> {
        to_real(&self.eval(zeta))
    }

    /// `psi(e^{2 pi i k / K})` for `k = 0..K`.
    pub fn boundary(&self, k: usize) -> Vec<CVec> {
        (0..k).map(|i| self.eval(unit(i, k))).collect()
    }

    /// `zeta -> psi(c zeta)`, e.g. a rotation or a shrink.
    pub fn precompose(&self, c: Complex64) -> AnalyticDisc {
        let mut p = Complex64::new(1.0, 0.0);
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let v = a.iter().map(|x| x * p).collect();
                p *= c;
                v
            })
            .collect();
        AnalyticDisc { coeffs }
    }

    /// `psi + v`.
    pub fn translate(&self, v: &[Complex64]) -> AnalyticDisc {
        let mut coeffs = self.coeffs.clone();
        coeffs[0].iter_mut().zip(v).for_each(|(a, b)| *a += b);
        AnalyticDisc { coeffs }
    }

    /// Diameter of `psi(closed disc)` from 256 boundary samples.
    pub fn diameter(&self) -> f64 {
        self.diameter_with(256)
    }

    /// Diameter of the image, which is attained on the boundary circle
    /// (`|psi(zeta) - psi(w)|` is subharmonic in each variable). The best pair
    /// among `k` equally spaced boundary samples is refined by a local
    /// pattern search in the two angles.
    pub fn diameter_with(&self, k: usize) -> f64 {
        let k = k.max(3);
        let pts = self.boundary(k);
        let (mut best, mut bi, mut bj) = (0.0, 0, 0);
        for i in 0..k {
            for j in i + 1..k {
                let d = dist_sq(&pts[i], &pts[j]);
                if d > best {
                    (best, bi, bj) = (d, i, j);
                }
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        let f = |a: f64, b: f64| {
            dist_sq(
                &self.eval(Complex64::from_polar(1.0, a)),
                &self.eval(Complex64::from_polar(1.0, b)),
            )
        };
        let (mut a, mut b) = (2.0 * PI * bi as f64 / k as f64, 2.0 * PI * bj as f64 / k as f64);
        let mut step = 2.0 * PI / k as f64;
        while step > 1e-12 {
            let mut improved = false;
            for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = f(a + da, b + db);
                if v > best {
                    (best, a, b) = (v, a + da, b + db);
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best.sqrt()
    }
}

pub(crate) fn unit(i: usize, k: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * i as f64 / k as f64)
}

fn dist_sq(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Parameters `0`, then `R` rings of `k` points at radii `i / R`; the last
/// ring is the boundary circle.
pub(crate) fn disc_grid(k: usize, rings: usize) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0)];
    for i in 1..=rings {
        let r = i as f64 / rings as f64;
        g.extend((0..k).map(|j| unit(j, k) * r));
    }
    g
}

/// Hausdorff distance between two finite point sets of equal dimension.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|p| p.len() != d) {
        return Err(Error::InvalidParameter("points must share one dimension".into()));
    }
    let one_sided = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| p.iter().zip(q).map(|(s, t)| (s - t) * (s - t)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)).sqrt())
}
