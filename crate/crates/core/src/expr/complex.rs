use num_complex::Complex64;

use super::Expr;
use crate::error::Result;

/// Complex-valued expression `re + i im` over the real coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CExpr {
    pub re: Expr,
    pub im: Expr,
}

impl CExpr {
    pub fn new(re: Expr, im: Expr) -> Self {
        CExpr { re, im }
    }

    pub fn real(re: Expr) -> Self {
        CExpr::new(re, Expr::zero())
    }

    pub fn zero() -> Self {
        CExpr::real(Expr::zero())
    }

    pub fn constant(c: Complex64) -> Self {
        CExpr::new(Expr::constant(c.re), Expr::constant(c.im))
    }

    /// The holomorphic coordinate `z_j`.
    pub fn z(j: usize) -> Self {
        CExpr::new(Expr::re_z(j), Expr::im_z(j))
    }

    /// The antiholomorphic coordinate `zbar_j`.
    pub fn zbar(j: usize) -> Self {
        CExpr::new(Expr::re_z(j), -Expr::im_z(j))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn size(&self) -> usize {
        self.re.size() + self.im.size()
    }

    pub fn conj(&self) -> Self {
        CExpr::new(self.re.clone(), -&self.im)
    }

    pub fn add(&self, o: &CExpr) -> Self {
        CExpr::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &CExpr) -> Self {
        CExpr::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &CExpr) -> Self {
        CExpr::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }

    pub fn neg(&self) -> Self {
        CExpr::new(-&self.re, -&self.im)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(self.re.eval(x)?, self.im.eval(x)?))
    }

    /// Wirtinger derivative in `z_j` (`conjugate = false`) or `zbar_j`.
    ///
    /// For `f = u + i v`: `df/dz = (u_x + v_y)/2 + i (v_x - u_y)/2` and
    /// `df/dzbar = (u_x - v_y)/2 + i (u_y + v_x)/2`.
    pub fn wirtinger(&self, j: usize, conjugate: bool) -> CExpr {
        let half = Expr::constant(0.5);
        let ux = self.re.diff(2 * j);
        let uy = self.re.diff(2 * j + 1);
        let vx = self.im.diff(2 * j);
        let vy = self.im.diff(2 * j + 1);
        if conjugate {
            CExpr::new(&half * &(&ux - &vy), &half * &(&uy + &vx))
        } else {
            CExpr::new(&half * &(&ux + &vy), &half * &(&vx - &uy))
        }
    }
}
