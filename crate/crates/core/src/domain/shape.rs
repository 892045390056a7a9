//! Exact signed level functions for the non-smooth catalog domains.
//!
//! Each planar factor reports a signed distance: minus the distance to its
//! boundary inside, plus the distance to its closure outside. Products and
//! set differences are assembled from these.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A planar set in one complex coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlaneSet {
    /// Open disc `|w| < radius`.
    Disc { radius: f64 },
    /// Open annulus `inner < |w| < outer`.
    Annulus { inner: f64, outer: f64 },
    /// Open square `|Re w|, |Im w| < outer` minus the closed square of
    /// half-width `inner`.
    SquareFrame { inner: f64, outer: f64 },
    /// Closed disc `|w| <= radius` cut to the half-plane `Re w >= cut`.
    CutDisc { radius: f64, cut: f64 },
}

fn box_sd(w: Complex64, h: f64) -> f64 {
    let qx = w.re.abs() - h;
    let qy = w.im.abs() - h;
    qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
}

impl PlaneSet {
    pub fn signed_distance(&self, w: Complex64) -> f64 {
        match *self {
            PlaneSet::Disc { radius } => w.norm() - radius,
            PlaneSet::Annulus { inner, outer } => (inner - w.norm()).max(w.norm() - outer),
            PlaneSet::SquareFrame { inner, outer } => box_sd(w, outer).max(-box_sd(w, inner)),
            PlaneSet::CutDisc { radius, cut } => {
                let depth = (w.norm() - radius).max(cut - w.re);
                if depth <= 0.0 {
                    return depth;
                }
                // the nearest point lies on the arc, on the segment, or at a corner
                let mut best = f64::INFINITY;
                let mut consider = |p: Complex64| {
                    if p.norm() <= radius * (1.0 + 1e-15) && p.re >= cut - 1e-15 {
                        best = best.min((w - p).norm());
                    }
                };
                if w.norm() > 0.0 {
                    consider(w * (radius / w.norm()));
                }
                consider(Complex64::new(cut, w.im));
                if radius > cut.abs() {
                    let h = (radius * radius - cut * cut).sqrt();
                    consider(Complex64::new(cut, h));
                    consider(Complex64::new(cut, -h));
                }
                best
            }
        }
    }
}

/// Domains built from planar factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Product {
        factors: Vec<PlaneSet>,
    },
    /// `outer` minus the closed product `hole`.
    Difference {
        outer: Vec<PlaneSet>,
        hole: Vec<PlaneSet>,
    },
}

fn product_level(factors: &[PlaneSet], z: &[Complex64]) -> f64 {
    let levels: Vec<f64> = factors.iter().zip(z).map(|(f, w)| f.signed_distance(*w)).collect();
    if levels.iter().all(|&l| l <= 0.0) {
        levels.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        levels.iter().map(|l| l.max(0.0).powi(2)).sum::<f64>().sqrt()
    }
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Product { factors } => factors.len(),
            Shape::Difference { outer, .. } => outer.len(),
        }
    }

    /// Signed level: `-delta` inside, distance to the closure outside.
    pub fn level(&self, z: &[Complex64]) -> f64 {
        match self {
            Shape::Product { factors } => product_level(factors, z),
            Shape::Difference { outer, hole } => product_level(outer, z).max(-product_level(hole, z)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annulus_and_frame() {
        let a = PlaneSet::Annulus { inner: 0.5, outer: 2.0 };
        assert_eq!(a.signed_distance(c(1.0, 0.0)), -0.5);
        assert_eq!(a.signed_distance(c(0.0, 0.0)), 0.5);
        assert_eq!(a.signed_distance(c(3.0, 0.0)), 1.0);
        let f = PlaneSet::SquareFrame { inner: 1.0, outer: 3.0 };
        assert!((f.signed_distance(c(2.0, 0.0)) + 1.0).abs() < 1e-15);
        assert!((f.signed_distance(c(0.75, 0.75)) - 0.25).abs() < 1e-15);
        assert!((f.signed_distance(c(2.0, 2.0)) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn cut_disc_projection() {
        let f = PlaneSet::CutDisc {
            radius: 1.0,
            cut: -0.75,
        };
        assert!((f.signed_distance(c(-0.85, 0.0)) - 0.1).abs() < 1e-12);
        assert!((f.signed_distance(c(0.0, 0.0)) + 0.75).abs() < 1e-12);
        assert!((f.signed_distance(c(2.0, 0.0)) - 1.0).abs() < 1e-12);
        let corner = c(-0.75, 7.0f64.sqrt() / 4.0);
        let p = corner + c(-0.094, 0.0342);
        assert!((f.signed_distance(p) - c(-0.094, 0.0342).norm()).abs() < 1e-12);
    }

    #[test]
    fn product_distance() {
        let s = Shape::Product {
            factors: vec![
                PlaneSet::Annulus { inner: 0.5, outer: 2.0 },
                PlaneSet::Disc { radius: 1.0 },
            ],
        };
        assert_eq!(s.level(&[c(1.0, 0.0), c(0.0, 0.0)]), -0.5);
        assert_eq!(s.level(&[c(0.0, 0.0), c(0.0, 0.0)]), 0.5);
    }
}
