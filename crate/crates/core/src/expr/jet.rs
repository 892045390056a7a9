//! Truncated multivariate Taylor polynomials.
//!
//! A [`TPoly`] holds the coefficients of a polynomial in `nvars` real
//! variables through total degree `order`. Arithmetic discards every term of
//! degree above `order`, so composing elementary functions with these jets
//! yields exact Taylor coefficients of the composite (up to rounding).
//! Differentiation lowers the order by one; binary operations take the
//! smaller order of their operands.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::flat_value;
use crate::error::{Error, Result};

/// Monomial bookkeeping for a fixed number of variables and maximum degree.
#[derive(Debug)]
pub struct MonomialTable {
    nvars: usize,
    max_order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `deg_start[d]` is the first index of degree `d`; length `max_order + 2`.
    deg_start: Vec<usize>,
    /// Product terms `(i, j, k)`: `out[k] += a[i] * b[j]`, grouped by `deg(k)`.
    mul: Vec<Vec<(u32, u32, u32)>>,
    /// Per variable: `(target, source, factor)` for the partial derivative.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

impl MonomialTable {
    fn build(nvars: usize, max_order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut deg_start = Vec::with_capacity(max_order + 2);
        for d in 0..=max_order {
            deg_start.push(exps.len());
            let mut cur = vec![0u8; nvars];
            push_compositions(&mut exps, &mut cur, 0, d);
        }
        deg_start.push(exps.len());
        let index: HashMap<Vec<u8>, usize> = exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |i: usize| exps[i].iter().map(|&e| e as usize).sum::<usize>();

        let mut mul = vec![Vec::new(); max_order + 1];
        let mut sum = vec![0u8; nvars];
        for i in 0..exps.len() {
            let di = degree(i);
            for j in 0..deg_start[max_order - di + 1] {
                for v in 0..nvars {
                    sum[v] = exps[i][v] + exps[j][v];
                }
                let k = index[&sum];
                mul[di + degree(j)].push((i as u32, j as u32, k as u32));
            }
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (v, list) in deriv.iter_mut().enumerate() {
            for (t, e) in exps.iter().enumerate() {
                if degree(t) + 1 > max_order {
                    continue;
                }
                let mut src = e.clone();
                src[v] += 1;
                list.push((t as u32, index[&src] as u32, src[v] as f64));
            }
        }

        MonomialTable {
            nvars,
            max_order,
            exps,
            index,
            deg_start,
            mul,
            deriv,
        }
    }

    /// Shared table for `(nvars, max_order)`.
    pub fn get(nvars: usize, max_order: usize) -> Arc<MonomialTable> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((nvars, max_order))
            .or_insert_with(|| Arc::new(MonomialTable::build(nvars, max_order)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// Index range of the monomials of total degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.deg_start[d]..self.deg_start[d + 1]
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, v: usize, remaining: usize) {
    if v + 1 == cur.len() {
        cur[v] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        cur[v] = e as u8;
        push_compositions(out, cur, v + 1, remaining - e);
    }
    cur[v] = 0;
}

/// Truncated real Taylor polynomial.
#[derive(Debug, Clone)]
pub struct TPoly {
    table: Arc<MonomialTable>,
    order: usize,
    coeffs: Vec<f64>,
}

impl TPoly {
    pub fn zero(nvars: usize, order: usize) -> Self {
        let table = MonomialTable::get(nvars, order);
        let n = table.len();
        TPoly {
            table,
            order,
            coeffs: vec![0.0; n],
        }
    }

    pub fn constant(nvars: usize, order: usize, c: f64) -> Self {
        let mut p = TPoly::zero(nvars, order);
        p.coeffs[0] = c;
        p
    }

    /// `value + t_v`, the seed for variable `v` expanded around `value`.
    pub fn variable(nvars: usize, order: usize, v: usize, value: f64) -> Self {
        let mut p = TPoly::constant(nvars, order, value);
        if order >= 1 {
            let mut e = vec![0u8; nvars];
            e[v] = 1;
            let k = p.table.index_of(&e).expect("degree-one monomial");
            p.coeffs[k] = 1.0;
        }
        p
    }

    /// Polynomial with the given coefficients in this table's monomial order.
    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        let table = MonomialTable::get(nvars, order);
        if coeffs.len() != table.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                table.len(),
                coeffs.len()
            )));
        }
        Ok(TPoly { table, order, coeffs })
    }

    pub fn constant_like(&self, c: f64) -> Self {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = c;
        TPoly {
            table: self.table.clone(),
            order: self.order,
            coeffs,
        }
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn nvars(&self) -> usize {
        self.table.nvars
    }

    /// Degree through which the coefficients are valid.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of the monomial with the given exponents (0 if absent).
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        let deg: usize = exps.iter().map(|&e| e as usize).sum();
        if deg > self.order {
            return 0.0;
        }
        self.table.index_of(exps).map_or(0.0, |k| self.coeffs[k])
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.coeffs.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("non-finite Taylor coefficient"))
        }
    }

    fn same_table(&self, o: &TPoly) {
        assert!(
            Arc::ptr_eq(&self.table, &o.table),
            "Taylor polynomials over different monomial tables"
        );
    }

    fn with_order(&self, order: usize) -> TPoly {
        let mut p = self.clone();
        p.truncate(order);
        p
    }

    fn truncate(&mut self, order: usize) {
        if order < self.order {
            let start = self.table.deg_start[order + 1];
            for c in &mut self.coeffs[start..] {
                *c = 0.0;
            }
            self.order = order;
        }
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        self.same_table(o);
        let order = self.order.min(o.order);
        let mut r = self.with_order(order);
        let end = self.table.deg_start[order + 1];
        for k in 0..end {
            r.coeffs[k] += o.coeffs[k];
        }
        r
    }

    pub fn sub(&self, o: &TPoly) -> TPoly {
        self.same_table(o);
        let order = self.order.min(o.order);
        let mut r = self.with_order(order);
        let end = self.table.deg_start[order + 1];
        for k in 0..end {
            r.coeffs[k] -= o.coeffs[k];
        }
        r
    }

    pub fn scale(&self, s: f64) -> TPoly {
        let mut r = self.clone();
        for c in &mut r.coeffs {
            *c *= s;
        }
        r
    }

    pub fn add_const(&self, c: f64) -> TPoly {
        let mut r = self.clone();
        r.coeffs[0] += c;
        r
    }

    pub fn neg(&self) -> TPoly {
        self.scale(-1.0)
    }

    pub fn mul(&self, o: &TPoly) -> TPoly {
        self.same_table(o);
        let order = self.order.min(o.order);
        let mut out = vec![0.0; self.coeffs.len()];
        for terms in &self.table.mul[..=order] {
            for &(i, j, k) in terms {
                let a = self.coeffs[i as usize];
                if a != 0.0 {
                    out[k as usize] += a * o.coeffs[j as usize];
                }
            }
        }
        TPoly {
            table: self.table.clone(),
            order,
            coeffs: out,
        }
    }

    /// Partial derivative in variable `v`; the order drops by one.
    pub fn derivative(&self, v: usize) -> TPoly {
        let mut out = vec![0.0; self.coeffs.len()];
        if self.order == 0 {
            return TPoly {
                table: self.table.clone(),
                order: 0,
                coeffs: out,
            };
        }
        let order = self.order - 1;
        let end = self.table.deg_start[order + 1];
        for &(t, s, f) in &self.table.deriv[v] {
            if (t as usize) < end {
                out[t as usize] = f * self.coeffs[s as usize];
            }
        }
        TPoly {
            table: self.table.clone(),
            order,
            coeffs: out,
        }
    }

    /// `sum_k series[k] * (self - self(0))^k`, i.e. composition with a
    /// univariate function whose Taylor coefficients at `self(0)` are `series`.
    pub fn compose(&self, series: &[f64]) -> TPoly {
        let mut dev = self.clone();
        dev.coeffs[0] = 0.0;
        let top = series.len().min(self.order + 1);
        let mut acc = self.constant_like(series.get(top.saturating_sub(1)).copied().unwrap_or(0.0));
        for k in (0..top.saturating_sub(1)).rev() {
            acc = acc.mul(&dev);
            acc.coeffs[0] += series[k];
        }
        acc.truncate(self.order);
        acc
    }

    pub fn recip(&self) -> Result<TPoly> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(Error::domain("division by a jet vanishing at the expansion point"));
        }
        let series: Vec<f64> = (0..=self.order)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s / u0.powi(k as i32 + 1)
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, o: &TPoly) -> Result<TPoly> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn powi(&self, n: i32) -> Result<TPoly> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result.truncate(self.order);
        Ok(result)
    }

    pub fn exp(&self) -> TPoly {
        let e0 = self.value().exp();
        let mut series = Vec::with_capacity(self.order + 1);
        let mut fact = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e0 / fact);
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<TPoly> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::domain(format!("log of jet with value {u0}")));
        }
        let series: Vec<f64> = (0..=self.order)
            .map(|k| {
                if k == 0 {
                    u0.ln()
                } else {
                    let s = if k % 2 == 1 { 1.0 } else { -1.0 };
                    s / (k as f64 * u0.powi(k as i32))
                }
            })
            .collect();
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<TPoly> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(Error::domain(format!("sqrt of jet with value {u0}")));
        }
        // binom(1/2, k) / u0^k scaled by sqrt(u0)
        let mut series = Vec::with_capacity(self.order + 1);
        let mut b = 1.0;
        for k in 0..=self.order {
            if k > 0 {
                b *= (0.5 - (k - 1) as f64) / k as f64;
            }
            series.push(u0.sqrt() * b / u0.powi(k as i32));
        }
        Ok(self.compose(&series))
    }

    /// Jet of `exp(-1/u) u^(-p)` (zero extension for `u <= 0`).
    pub fn flat(&self, p: u32) -> TPoly {
        let u0 = self.value();
        if u0 <= 0.0 || flat_value(u0, p) == 0.0 {
            // Every derivative vanishes for u <= 0; for tiny positive u the
            // coefficients underflow as well.
            let mut r = self.constant_like(0.0);
            if u0 > 0.0 {
                r.coeffs[0] = flat_value(u0, p);
            }
            return r;
        }
        self.compose(&flat_series(u0, p, self.order))
    }
}

/// Taylor coefficients of `v -> exp(-1/(u0+v)) (u0+v)^(-p)` at `v = 0`.
fn flat_series(u0: f64, p: u32, order: usize) -> Vec<f64> {
    let u = TPoly::variable(1, order, 0, u0);
    let r = u.recip().expect("u0 > 0");
    let e = r.neg().exp();
    let f = e.mul(&r.powi(p as i32).expect("non-negative power"));
    f.coeffs
}

/// Complex-valued truncated Taylor polynomial `re + i im`.
#[derive(Debug, Clone)]
pub struct CPoly {
    pub re: TPoly,
    pub im: TPoly,
}

impl CPoly {
    pub fn new(re: TPoly, im: TPoly) -> Self {
        CPoly { re, im }
    }

    pub fn real(re: TPoly) -> Self {
        let im = re.constant_like(0.0);
        CPoly { re, im }
    }

    pub fn constant_like(&self, c: Complex64) -> Self {
        CPoly::new(self.re.constant_like(c.re), self.re.constant_like(c.im))
    }

    pub fn order(&self) -> usize {
        self.re.order.min(self.im.order)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }

    pub fn max_abs(&self) -> f64 {
        self.re.max_abs().max(self.im.max_abs())
    }

    pub fn add(&self, o: &CPoly) -> CPoly {
        CPoly::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CPoly) -> CPoly {
        CPoly::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> CPoly {
        CPoly::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> CPoly {
        CPoly::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &CPoly) -> CPoly {
        CPoly::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, c: Complex64) -> CPoly {
        CPoly::new(
            self.re.scale(c.re).sub(&self.im.scale(c.im)),
            self.re.scale(c.im).add(&self.im.scale(c.re)),
        )
    }

    pub fn add_const(&self, c: Complex64) -> CPoly {
        CPoly::new(self.re.add_const(c.re), self.im.add_const(c.im))
    }

    /// Wirtinger derivative in `z_j` (variables `2j`, `2j+1`), or in
    /// `zbar_j` when `conjugate`.
    pub fn wirtinger(&self, j: usize, conjugate: bool) -> CPoly {
        let ux = self.re.derivative(2 * j);
        let uy = self.re.derivative(2 * j + 1);
        let vx = self.im.derivative(2 * j);
        let vy = self.im.derivative(2 * j + 1);
        if conjugate {
            CPoly::new(ux.sub(&vy).scale(0.5), uy.add(&vx).scale(0.5))
        } else {
            CPoly::new(ux.add(&vy).scale(0.5), vx.sub(&uy).scale(0.5))
        }
    }
}
