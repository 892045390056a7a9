//! Iterated forward differences and a Lipschitz-exponent estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `j`-th forward difference of `g` at `x` with step `h`.
///
/// Computed by the recurrence `D^j g(x) = D^(j-1) g(x + h) - D^(j-1) g(x)` on
/// the samples `g(x), g(x + h), .., g(x + j h)`, which equals the binomial sum
/// `sum_k (-1)^(j-k) C(j,k) g(x + k h)`.
pub fn forward_difference<G>(g: G, x: f64, h: f64, j: usize) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    if j == 0 {
        return Err(Error::InvalidParameter("difference order must be positive".into()));
    }
    let mut d = (0..=j).map(|k| g(x + k as f64 * h)).collect::<Result<Vec<f64>>>()?;
    difference_table(&mut d, j);
    Ok(d[0])
}

/// In-place `j`-fold differencing; afterwards `d[i]` holds `D^j` at sample `i`
/// for `i < d.len() - j`.
fn difference_table(d: &mut [f64], j: usize) {
    for level in 0..j {
        for i in 0..d.len() - level - 1 {
            d[i] = d[i + 1] - d[i];
        }
    }
}

/// Differences below `DIFFERENCE_ZERO_REL * (1 + max |g|)` count as zero.
pub const DIFFERENCE_ZERO_REL: f64 = 1e-12;

/// Result of [`lipschitz_exponent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Fitted exponent, clamped to `(0, j]`.
    pub alpha: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// True when the differences vanish at every scale; `alpha` is then `j`.
    pub saturated: bool,
    /// Boundedness is only checked on the sampled points.
    pub bounded_on_samples: bool,
    pub max_abs_on_samples: f64,
    pub order: usize,
    /// `(h, sup |D_h^j g|)` for each dyadic scale.
    pub scales: Vec<(f64, f64)>,
}

/// Estimates the largest `alpha` with `|D_h^j g(x)| <= C |h|^alpha` on
/// `[lo, hi]`.
///
/// For each dyadic step `h = (hi - lo) / 2^l`, `l = 2..=log2(samples)`, the
/// supremum of `|D_h^j g|` is taken over base points spaced `h/2` apart, and
/// `alpha` is the least-squares slope of `log sup` against `log h`.
pub fn lipschitz_exponent<G>(g: G, interval: (f64, f64), j: usize, samples: usize) -> Result<LipschitzEstimate>
where
    G: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = interval;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("interval must satisfy lo < hi".into()));
    }
    if j == 0 {
        return Err(Error::InvalidParameter("difference order must be positive".into()));
    }
    if samples < 32 {
        return Err(Error::InvalidParameter("at least 32 samples are required".into()));
    }
    let len = hi - lo;
    let finest = (samples as f64).log2().floor() as u32;
    let mut scales = Vec::new();
    let mut max_abs = 0.0f64;
    let mut bounded = true;
    for l in 2..=finest {
        let h = len / 2f64.powi(l as i32);
        let half = h / 2.0;
        let npts = (len / half).round() as usize + 1;
        let mut vals = Vec::with_capacity(npts);
        for m in 0..npts {
            let v = g(lo + m as f64 * half)?;
            if !v.is_finite() {
                bounded = false;
            }
            max_abs = max_abs.max(v.abs());
            vals.push(v);
        }
        // D_h^j at base m uses samples m, m+2, .., m+2j on the h/2 grid
        let mut sup = 0.0f64;
        let span = 2 * j;
        if npts > span {
            let mut buf = vec![0.0; j + 1];
            for m in 0..npts - span {
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = vals[m + 2 * k];
                }
                difference_table(&mut buf, j);
                sup = sup.max(buf[0].abs());
            }
        }
        scales.push((h, sup));
    }
    let zero = DIFFERENCE_ZERO_REL * (1.0 + max_abs);
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .filter(|(_, s)| *s > zero)
        .map(|&(h, s)| (h.ln(), s.ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(LipschitzEstimate {
            alpha: j as f64,
            residual: 0.0,
            saturated: true,
            bounded_on_samples: bounded,
            max_abs_on_samples: max_abs,
            order: j,
            scales,
        });
    }
    let (slope, residual) = least_squares_slope(&pts);
    Ok(LipschitzEstimate {
        alpha: slope.clamp(1e-9, j as f64),
        residual,
        saturated: false,
        bounded_on_samples: bounded,
        max_abs_on_samples: max_abs,
        order: j,
        scales,
    })
}

/// Slope and RMS residual of the least-squares line through `pts`.
pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    (slope, (rss / n).sqrt())
}
