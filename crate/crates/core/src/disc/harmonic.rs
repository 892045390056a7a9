use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVec;

/// Discrete harmonic extension of a closed curve sampled at equally spaced
/// parameters `t_k = 2 pi k / K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicDisc {
    samples: Vec<CVec>,
}

fn gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

impl HarmonicDisc {
    /// Builds the extension from at least 64 samples. A repeated endpoint is
    /// dropped; otherwise the closing gap must be no longer than twice the
    /// longest step between consecutive samples.
    pub fn from_samples(mut samples: Vec<CVec>) -> Result<Self> {
        let n = samples.first().map_or(0, Vec::len);
        if n == 0 || samples.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidParameter(
                "curve samples must share a positive dimension".into(),
            ));
        }
        let scale = samples.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
        if samples.len() > 1 && gap(&samples[0], samples.last().unwrap()) <= 1e-12 * (1.0 + scale) {
            samples.pop();
        }
        if samples.len() < 64 {
            return Err(Error::InvalidParameter(format!(
                "a harmonic disc needs at least 64 curve samples, got {}",
                samples.len()
            )));
        }
        let spacing = samples.windows(2).map(|w| gap(&w[0], &w[1])).fold(0.0, f64::max);
        let closing = gap(&samples[0], samples.last().unwrap());
        if closing > 2.0 * spacing + 1e-12 * (1.0 + scale) {
            return Err(Error::CurveNotClosed { gap: closing, spacing });
        }
        Ok(HarmonicDisc { samples })
    }

    pub fn samples(&self) -> &[CVec] {
        &self.samples
    }

    /// Value at 0: the Poisson kernel there is constant, so this is the mean.
    pub fn center(&self) -> CVec {
        let k = self.samples.len() as f64;
        let n = self.samples[0].len();
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        for s in &self.samples {
            m.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        }
        m.iter_mut().for_each(|a| *a /= k);
        m
    }

    /// Discrete Poisson integral at `|zeta| < 1`, componentwise on the real
    /// and imaginary parts.
    pub fn eval(&self, zeta: Complex64) -> Result<CVec> {
        let r = zeta.norm();
        if !(r < 1.0) {
            return Err(Error::InvalidParameter(
                "harmonic disc is evaluated at |zeta| < 1".into(),
            ));
        }
        let theta = zeta.arg();
        let k = self.samples.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.samples[0].len()];
        let mut wsum = 0.0;
        for (i, s) in self.samples.iter().enumerate() {
            let t = 2.0 * PI * i as f64 / k as f64;
            let w = (1.0 - r * r) / (1.0 - 2.0 * r * (theta - t).cos() + r * r);
            wsum += w;
            acc.iter_mut().zip(s).for_each(|(a, b)| *a += b * w);
        }
        acc.iter_mut().for_each(|a| *a /= wsum);
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(k: usize) -> Vec<CVec> {
        (0..k)
            .map(|i| {
                vec![
                    Complex64::from_polar(1.0, 2.0 * PI * i as f64 / k as f64),
                    Complex64::new(2.0, -1.0),
                ]
            })
            .collect()
    }

    #[test]
    fn circle_and_constant() {
        let h = HarmonicDisc::from_samples(circle(256)).unwrap();
        let c = h.center();
        assert!(c[0].norm() < 1e-14);
        assert!((c[1] - Complex64::new(2.0, -1.0)).norm() < 1e-14);
        // the identity is harmonic
        let z = Complex64::new(0.3, -0.4);
        let v = h.eval(z).unwrap();
        assert!((v[0] - z).norm() < 1e-12);
        assert!((v[1] - Complex64::new(2.0, -1.0)).norm() < 1e-12);
        assert!(h.eval(Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn closedness() {
        let mut s = circle(128);
        s.push(s[0].clone());
        assert_eq!(HarmonicDisc::from_samples(s).unwrap().samples().len(), 128);
        let half: Vec<CVec> = circle(256).into_iter().take(128).collect();
        assert!(matches!(
            HarmonicDisc::from_samples(half),
            Err(Error::CurveNotClosed { .. })
        ));
        assert!(HarmonicDisc::from_samples(circle(32)).is_err());
    }
}
