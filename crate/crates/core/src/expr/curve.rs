//! Jets of an expression pulled back along curves and analytic discs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jet::{CPoly, TPoly};
use super::Expr;
use crate::error::{Error, Result};

/// Largest jet order accepted by [`curve_jet`] and [`disc_jet`].
pub const DEFAULT_MAX_JET_ORDER: usize = 16;

/// Relative threshold below which a jet coefficient counts as zero.
pub const JET_ZERO_REL: f64 = 1e-8;

fn check_order(order: usize) -> Result<()> {
    if order > DEFAULT_MAX_JET_ORDER {
        Err(Error::InvalidParameter(format!(
            "jet order {order} exceeds the maximum {DEFAULT_MAX_JET_ORDER}"
        )))
    } else {
        Ok(())
    }
}

fn is_zero(c: f64, scale: f64) -> bool {
    c.abs() <= JET_ZERO_REL * (1.0 + scale)
}

/// Truncated Taylor coefficients `c_0..c_M` of a function of one real
/// parameter at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet1D {
    pub coeffs: Vec<f64>,
}

impl Jet1D {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Index of the first coefficient that is not numerically zero, or
    /// `None` if all of them vanish.
    pub fn vanishing_order(&self) -> Option<usize> {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        self.coeffs.iter().position(|&c| !is_zero(c, scale))
    }
}

/// Polynomial curve `t -> sum_k coeffs[k] t^k` in real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCurve {
    pub coeffs: Vec<Vec<f64>>,
}

impl PolyCurve {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        PolyCurve { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for c in self.coeffs.iter().rev() {
            for (o, ci) in out.iter_mut().zip(c) {
                *o = *o * t + ci;
            }
        }
        out
    }
}

/// Coefficients of `t -> e(gamma(t))` at `t = 0` through `order`.
pub fn curve_jet(e: &Expr, gamma: &PolyCurve, order: usize) -> Result<Jet1D> {
    check_order(order)?;
    let dim = gamma.dim();
    if gamma.coeffs.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidParameter("ragged curve coefficients".into()));
    }
    e.check_vars(dim)?;
    let t = TPoly::variable(1, order, 0, 0.0);
    let inputs: Vec<TPoly> = (0..dim)
        .map(|i| {
            let mut acc = t.constant_like(0.0);
            for c in gamma.coeffs.iter().rev() {
                acc = acc.mul(&t).add_const(c[i]);
            }
            acc
        })
        .collect();
    let jet = e.taylor(&inputs)?;
    Ok(Jet1D {
        coeffs: jet.coeffs().to_vec(),
    })
}

/// Jet of a real function of the complex parameter `zeta = s + i t`, stored
/// as a truncated polynomial in the two real parameters `(s, t)`.
#[derive(Debug, Clone)]
pub struct BiJet {
    poly: TPoly,
}

impl BiJet {
    pub fn order(&self) -> usize {
        self.poly.order()
    }

    pub fn poly(&self) -> &TPoly {
        &self.poly
    }

    /// Value at `zeta = 0`.
    pub fn value(&self) -> f64 {
        self.poly.value()
    }

    /// Coefficients of `s^a t^(k-a)` for `a = k, k-1, .., 0`.
    pub fn homogeneous(&self, k: usize) -> Vec<f64> {
        if k > self.order() {
            return vec![0.0; k + 1];
        }
        self.poly.coeffs()[self.poly.table().degree_range(k)].to_vec()
    }

    pub fn max_abs(&self) -> f64 {
        self.poly.max_abs()
    }

    /// Lowest total degree with a coefficient that is not numerically zero.
    pub fn vanishing_order(&self) -> Option<usize> {
        let scale = self.max_abs();
        (0..=self.order()).find(|&k| self.homogeneous(k).iter().any(|&c| !is_zero(c, scale)))
    }

    /// Degree-`k` component in the `zeta^p zetabar^(k-p)` basis, indexed by `p`.
    ///
    /// Uses `s = (zeta + zetabar)/2` and `t = (zeta - zetabar)/(2i)`.
    pub fn bidegree(&self, k: usize) -> Vec<Complex64> {
        let hom = self.homogeneous(k);
        let mut out = vec![Complex64::new(0.0, 0.0); k + 1];
        // hom[idx] multiplies s^a t^b with a = k - idx, b = idx
        for (idx, &c) in hom.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let a = k - idx;
            let b = idx;
            // s^a = 2^-a sum_i C(a,i) zeta^i zetabar^(a-i)
            // t^b = (2i)^-b sum_j C(b,j) zeta^j (-zetabar)^(b-j)
            let scale = Complex64::new(0.5f64.powi(a as i32), 0.0) * Complex64::new(0.0, 2.0).powi(-(b as i32));
            for i in 0..=a {
                for j in 0..=b {
                    let sign = if (b - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let w = binom(a, i) * binom(b, j) * sign;
                    out[i + j] += scale * c * w;
                }
            }
        }
        out
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Jet of `zeta -> e(psi(zeta))` for the polynomial disc
/// `psi(zeta) = sum_k coeffs[k] zeta^k` with complex coefficient vectors.
pub fn disc_jet(e: &Expr, coeffs: &[Vec<Complex64>], order: usize) -> Result<BiJet> {
    check_order(order)?;
    let n = coeffs.first().map_or(0, Vec::len);
    if n == 0 || coeffs.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParameter(
            "disc coefficients must be non-empty n-vectors".into(),
        ));
    }
    e.check_vars(2 * n)?;
    let s = TPoly::variable(2, order, 0, 0.0);
    let t = TPoly::variable(2, order, 1, 0.0);
    let zeta = CPoly::new(s.clone(), t);
    let mut powers = vec![CPoly::real(s.constant_like(1.0))];
    for k in 1..coeffs.len() {
        let next = powers[k - 1].mul(&zeta);
        powers.push(next);
    }
    let mut inputs = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut acc = CPoly::real(s.constant_like(0.0));
        for (k, a) in coeffs.iter().enumerate() {
            acc = acc.add(&powers[k].scale(a[j]));
        }
        inputs.push(acc.re);
        inputs.push(acc.im);
    }
    Ok(BiJet {
        poly: e.taylor(&inputs)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jet_of_coordinate_along_parabola() {
        let gamma = PolyCurve::new(vec![vec![0.0, 1.0], vec![0.0, 0.0], vec![1.0, 0.0]]);
        let j = curve_jet(&Expr::var(0), &gamma, 5).unwrap();
        assert_eq!(j.coeffs, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(j.vanishing_order(), Some(2));
    }

    #[test]
    fn model_defining_function_vanishes_to_fourth_order_on_axis_disc() {
        let rho = parse("2*re(z2) + absq(z1)^2").unwrap();
        let disc = vec![vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        let j = disc_jet(&rho, &disc, 8).unwrap();
        assert_eq!(j.vanishing_order(), Some(4));
        // |zeta|^4 = zeta^2 zetabar^2
        let b = j.bidegree(4);
        assert!((b[2] - c(1.0, 0.0)).norm() < 1e-14);
        for (p, v) in b.iter().enumerate() {
            if p != 2 {
                assert!(v.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_term_of_sphere_jet() {
        let rho = parse("absq(z1) - 1").unwrap();
        let disc = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        let j = disc_jet(&rho, &disc, 4).unwrap();
        assert_eq!(j.value(), -1.0);
    }

    #[test]
    fn harmonic_part_in_bidegree_basis() {
        // Re(zeta^3) = (zeta^3 + zetabar^3)/2
        let rho = parse("re(z1)").unwrap();
        let disc = vec![
            vec![c(0.0, 0.0)],
            vec![c(0.0, 0.0)],
            vec![c(0.0, 0.0)],
            vec![c(1.0, 0.0)],
        ];
        let j = disc_jet(&rho, &disc, 4).unwrap();
        let b = j.bidegree(3);
        assert!((b[3] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((b[0] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(b[1].norm() < 1e-14 && b[2].norm() < 1e-14);
    }

    #[test]
    fn order_cap() {
        let gamma = PolyCurve::new(vec![vec![0.0]]);
        assert!(curve_jet(&Expr::var(0), &gamma, 17).is_err());
    }
}
