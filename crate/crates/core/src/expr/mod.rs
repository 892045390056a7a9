//! Real-analytic expression trees over the real coordinates `x1..x{2n}`.
//!
//! Complex coordinates follow the convention `z_j = x_{2j-1} + i x_{2j}`, so
//! with zero-based indices `z_j` (j = 0..n) is `(x[2j], x[2j+1])`.
//!
//! Expressions are immutable and cheaply clonable (`Arc`-backed), which lets
//! derivatives share subtrees with the expression they came from.

mod complex;
pub mod curve;
pub mod difference;
pub mod jet;
mod parse;
mod tape;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use complex::CExpr;
pub use curve::{curve_jet, disc_jet, BiJet, Jet1D, PolyCurve, DEFAULT_MAX_JET_ORDER};
pub use difference::{forward_difference, lipschitz_exponent, LipschitzEstimate, DIFFERENCE_ZERO_REL};
pub use jet::{CPoly, TPoly};
pub use parse::parse;
pub use tape::Tape;

/// One node of an expression tree. Arity is fixed by the variant.
#[derive(Debug, Clone)]
pub enum Node {
    Const(f64),
    /// Zero-based real coordinate index.
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Powi(Expr, i32),
    Exp(Expr),
    Log(Expr),
    Sqrt(Expr),
    /// `exp(-1/u) * u^(-p)` for `u > 0`, and `0` for `u <= 0`.
    ///
    /// A C-infinity function of `u` whose Taylor series at `u = 0` vanishes
    /// identically. Closed under differentiation, which is why it carries the
    /// power `p`.
    Flat(Expr, u32),
}

struct Inner {
    node: Node,
    hash: u64,
    size: usize,
}

/// Immutable expression handle.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

fn mix(tag: u64, parts: &[u64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    tag.hash(&mut h);
    parts.hash(&mut h);
    h.finish()
}

impl Expr {
    fn from_node(node: Node) -> Self {
        let (hash, size) = match &node {
            Node::Const(c) => (mix(0, &[c.to_bits()]), 1),
            Node::Var(i) => (mix(1, &[*i as u64]), 1),
            Node::Add(a, b) => (mix(2, &[a.0.hash, b.0.hash]), 1 + a.size() + b.size()),
            Node::Sub(a, b) => (mix(3, &[a.0.hash, b.0.hash]), 1 + a.size() + b.size()),
            Node::Mul(a, b) => (mix(4, &[a.0.hash, b.0.hash]), 1 + a.size() + b.size()),
            Node::Div(a, b) => (mix(5, &[a.0.hash, b.0.hash]), 1 + a.size() + b.size()),
            Node::Powi(a, n) => (mix(6, &[a.0.hash, *n as u64]), 1 + a.size()),
            Node::Exp(a) => (mix(7, &[a.0.hash]), 1 + a.size()),
            Node::Log(a) => (mix(8, &[a.0.hash]), 1 + a.size()),
            Node::Sqrt(a) => (mix(9, &[a.0.hash]), 1 + a.size()),
            Node::Flat(a, p) => (mix(10, &[a.0.hash, *p as u64]), 1 + a.size()),
        };
        Expr(Arc::new(Inner { node, hash, size }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Number of nodes counted as a tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        self.0.size
    }

    /// Structural hash, stable within a process.
    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    fn key(&self) -> *const Inner {
        Arc::as_ptr(&self.0)
    }

    pub fn constant(c: f64) -> Self {
        Expr::from_node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    /// Real coordinate with zero-based index `i` (printed as `x{i+1}`).
    pub fn var(i: usize) -> Self {
        Expr::from_node(Node::Var(i))
    }

    /// `Re z_j` for zero-based complex index `j`.
    pub fn re_z(j: usize) -> Self {
        Expr::var(2 * j)
    }

    /// `Im z_j` for zero-based complex index `j`.
    pub fn im_z(j: usize) -> Self {
        Expr::var(2 * j + 1)
    }

    /// `|z_j|^2`.
    pub fn abs_sq_z(j: usize) -> Self {
        Expr::re_z(j).powi(2) + Expr::im_z(j).powi(2)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            let v = c.powi(n);
            if v.is_finite() {
                return Expr::constant(v);
            }
        }
        Expr::from_node(Node::Powi(self.clone(), n))
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) if c.exp().is_finite() => Expr::constant(c.exp()),
            _ => Expr::from_node(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Expr {
        match self.as_const() {
            Some(c) if c > 0.0 => Expr::constant(c.ln()),
            _ => Expr::from_node(Node::Log(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_const() {
            Some(c) if c >= 0.0 => Expr::constant(c.sqrt()),
            _ => Expr::from_node(Node::Sqrt(self.clone())),
        }
    }

    /// `exp(-1/u) * u^(-p)`, extended by zero for `u <= 0`.
    pub fn flat(&self, p: u32) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(flat_value(c, p)),
            None => Expr::from_node(Node::Flat(self.clone(), p)),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut seen = HashMap::new();
        self.visit(&mut seen, &mut |n| {
            if let Node::Var(i) = n {
                best = Some(best.map_or(*i, |b| b.max(*i)));
            }
        });
        best
    }

    fn visit(&self, seen: &mut HashMap<*const Inner, ()>, f: &mut impl FnMut(&Node)) {
        if seen.insert(self.key(), ()).is_some() {
            return;
        }
        f(self.node());
        match self.node() {
            Node::Const(_) | Node::Var(_) => {}
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit(seen, f);
                b.visit(seen, f);
            }
            Node::Powi(a, _) | Node::Exp(a) | Node::Log(a) | Node::Sqrt(a) | Node::Flat(a, _) => a.visit(seen, f),
        }
    }

    /// Number of distinct nodes (shared subtrees counted once).
    pub fn dag_size(&self) -> usize {
        let mut seen = HashMap::new();
        let mut count = 0;
        self.visit(&mut seen, &mut |_| count += 1);
        count
    }

    /// Checks that every variable index is below `dim`.
    pub fn check_vars(&self, dim: usize) -> Result<()> {
        match self.max_var() {
            Some(i) if i >= dim => Err(Error::VariableOutOfRange { index: i, dim }),
            _ => Ok(()),
        }
    }

    /// Exact recursive evaluation at the real point `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self.node() {
            Node::Const(c) => *c,
            Node::Var(i) => *x.get(*i).ok_or(Error::VariableOutOfRange {
                index: *i,
                dim: x.len(),
            })?,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Node::Div(a, b) => checked_div(a.eval(x)?, b.eval(x)?)?,
            Node::Powi(a, n) => checked_powi(a.eval(x)?, *n)?,
            Node::Exp(a) => a.eval(x)?.exp(),
            Node::Log(a) => checked_ln(a.eval(x)?)?,
            Node::Sqrt(a) => checked_sqrt(a.eval(x)?)?,
            Node::Flat(a, p) => flat_value(a.eval(x)?, *p),
        };
        finite(v)
    }

    /// Symbolic partial derivative with respect to the zero-based real
    /// coordinate `i`.
    pub fn diff(&self, i: usize) -> Expr {
        let mut memo = HashMap::new();
        self.diff_memo(i, &mut memo)
    }

    fn diff_memo(&self, i: usize, memo: &mut HashMap<*const Inner, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff_memo(i, memo) + b.diff_memo(i, memo),
            Node::Sub(a, b) => a.diff_memo(i, memo) - b.diff_memo(i, memo),
            Node::Mul(a, b) => {
                let da = a.diff_memo(i, memo);
                let db = b.diff_memo(i, memo);
                &da * b + a * &db
            }
            Node::Div(a, b) => {
                let da = a.diff_memo(i, memo);
                let db = b.diff_memo(i, memo);
                &da / b - &(a * &db) / &b.powi(2)
            }
            Node::Powi(a, n) => {
                let da = a.diff_memo(i, memo);
                Expr::constant(*n as f64) * a.powi(n - 1) * da
            }
            Node::Exp(a) => {
                let da = a.diff_memo(i, memo);
                self * &da
            }
            Node::Log(a) => {
                let da = a.diff_memo(i, memo);
                &da / a
            }
            Node::Sqrt(a) => {
                let da = a.diff_memo(i, memo);
                &da / &(Expr::constant(2.0) * self.clone())
            }
            Node::Flat(u, p) => {
                let du = u.diff_memo(i, memo);
                let outer = if *p == 0 {
                    u.flat(2)
                } else {
                    u.flat(p + 2) - Expr::constant(*p as f64) * u.flat(p + 1)
                };
                outer * du
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Wirtinger derivative `d/dz_j` (or `d/dzbar_j` when `conjugate`) of this
    /// real-valued expression, returned as real and imaginary parts.
    ///
    /// `d/dz = (d/dx - i d/dy) / 2`, `d/dzbar = (d/dx + i d/dy) / 2`.
    pub fn wirtinger(&self, j: usize, conjugate: bool) -> (Expr, Expr) {
        let half = Expr::constant(0.5);
        let dx = self.diff(2 * j);
        let dy = self.diff(2 * j + 1);
        let re = &half * &dx;
        let im = if conjugate { &half * &dy } else { -(&half * &dy) };
        (re, im)
    }

    /// Replaces every variable `x_i` by `vars[i]`.
    pub fn substitute(&self, vars: &[Expr]) -> Result<Expr> {
        let mut memo = HashMap::new();
        self.subst_memo(vars, &mut memo)
    }

    fn subst_memo(&self, vars: &[Expr], memo: &mut HashMap<*const Inner, Expr>) -> Result<Expr> {
        if let Some(e) = memo.get(&self.key()) {
            return Ok(e.clone());
        }
        let e = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => vars.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: *i,
                dim: vars.len(),
            })?,
            Node::Add(a, b) => a.subst_memo(vars, memo)? + b.subst_memo(vars, memo)?,
            Node::Sub(a, b) => a.subst_memo(vars, memo)? - b.subst_memo(vars, memo)?,
            Node::Mul(a, b) => a.subst_memo(vars, memo)? * b.subst_memo(vars, memo)?,
            Node::Div(a, b) => a.subst_memo(vars, memo)? / b.subst_memo(vars, memo)?,
            Node::Powi(a, n) => a.subst_memo(vars, memo)?.powi(*n),
            Node::Exp(a) => a.subst_memo(vars, memo)?.exp(),
            Node::Log(a) => a.subst_memo(vars, memo)?.ln(),
            Node::Sqrt(a) => a.subst_memo(vars, memo)?.sqrt(),
            Node::Flat(a, p) => a.subst_memo(vars, memo)?.flat(*p),
        };
        memo.insert(self.key(), e.clone());
        Ok(e)
    }

    /// Truncated Taylor arithmetic: evaluates the expression with every
    /// variable replaced by the corresponding truncated polynomial.
    pub fn taylor(&self, inputs: &[TPoly]) -> Result<TPoly> {
        let mut memo = HashMap::new();
        self.taylor_memo(inputs, &mut memo)
    }

    fn taylor_memo(&self, inputs: &[TPoly], memo: &mut HashMap<*const Inner, TPoly>) -> Result<TPoly> {
        if let Some(t) = memo.get(&self.key()) {
            return Ok(t.clone());
        }
        let template = inputs
            .first()
            .ok_or_else(|| Error::InvalidParameter("no jet inputs".into()))?;
        let t = match self.node() {
            Node::Const(c) => template.constant_like(*c),
            Node::Var(i) => inputs.get(*i).cloned().ok_or(Error::VariableOutOfRange {
                index: *i,
                dim: inputs.len(),
            })?,
            Node::Add(a, b) => a.taylor_memo(inputs, memo)?.add(&b.taylor_memo(inputs, memo)?),
            Node::Sub(a, b) => a.taylor_memo(inputs, memo)?.sub(&b.taylor_memo(inputs, memo)?),
            Node::Mul(a, b) => a.taylor_memo(inputs, memo)?.mul(&b.taylor_memo(inputs, memo)?),
            Node::Div(a, b) => a.taylor_memo(inputs, memo)?.div(&b.taylor_memo(inputs, memo)?)?,
            Node::Powi(a, n) => a.taylor_memo(inputs, memo)?.powi(*n)?,
            Node::Exp(a) => a.taylor_memo(inputs, memo)?.exp(),
            Node::Log(a) => a.taylor_memo(inputs, memo)?.ln()?,
            Node::Sqrt(a) => a.taylor_memo(inputs, memo)?.sqrt()?,
            Node::Flat(a, p) => a.taylor_memo(inputs, memo)?.flat(*p),
        };
        t.check_finite()?;
        memo.insert(self.key(), t.clone());
        Ok(t)
    }
}

pub(crate) fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("non-finite intermediate value {v}")))
    }
}

pub(crate) fn checked_div(a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        Err(Error::domain("division by zero"))
    } else {
        finite(a / b)
    }
}

pub(crate) fn checked_powi(a: f64, n: i32) -> Result<f64> {
    if n < 0 && a == 0.0 {
        Err(Error::domain("negative power of zero"))
    } else {
        finite(a.powi(n))
    }
}

pub(crate) fn checked_ln(a: f64) -> Result<f64> {
    if a <= 0.0 {
        Err(Error::domain(format!("log of non-positive value {a}")))
    } else {
        Ok(a.ln())
    }
}

pub(crate) fn checked_sqrt(a: f64) -> Result<f64> {
    if a < 0.0 {
        Err(Error::domain(format!("sqrt of negative value {a}")))
    } else {
        Ok(a.sqrt())
    }
}

pub(crate) fn flat_value(u: f64, p: u32) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u - p as f64 * u.ln()).exp()
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d)) => a == c && b == d,
            (Node::Powi(a, n), Node::Powi(b, m)) => n == m && a == b,
            (Node::Exp(a), Node::Exp(b)) | (Node::Log(a), Node::Log(b)) | (Node::Sqrt(a), Node::Sqrt(b)) => a == b,
            (Node::Flat(a, p), Node::Flat(b, q)) => p == q && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Powi(..) => 3,
        Node::Const(c) if *c < 0.0 => 0,
        _ => 4,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e.node()) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints in the infix syntax accepted by [`parse`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Node::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Node::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Node::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
            Node::Powi(a, n) => {
                write_child(f, a, 4)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Flat(a, 0) => write!(f, "flat({a})"),
            Node::Flat(a, p) => write!(f, "flat({a}, {p})"),
        }
    }
}

fn add_expr(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        (Some(0.0), _) => b.clone(),
        (_, Some(0.0)) => a.clone(),
        _ => Expr::from_node(Node::Add(a.clone(), b.clone())),
    }
}

fn sub_expr(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x - y),
        (_, Some(0.0)) => a.clone(),
        (Some(0.0), _) => neg_expr(b),
        _ => Expr::from_node(Node::Sub(a.clone(), b.clone())),
    }
}

fn mul_expr(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Expr::zero(),
        (Some(1.0), _) => b.clone(),
        (_, Some(1.0)) => a.clone(),
        (None, Some(_)) => mul_expr(b, a),
        (Some(x), None) => {
            // fold nested constant factors: c1 * (c2 * e)
            if let Node::Mul(l, r) = b.node() {
                if let Some(y) = l.as_const() {
                    return mul_expr(&Expr::constant(x * y), r);
                }
            }
            Expr::from_node(Node::Mul(a.clone(), b.clone()))
        }
        (None, None) => Expr::from_node(Node::Mul(a.clone(), b.clone())),
    }
}

fn div_expr(a: &Expr, b: &Expr) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != 0.0 => Expr::constant(x / y),
        (Some(x), _) if x == 0.0 && !b.is_zero() => Expr::zero(),
        (_, Some(1.0)) => a.clone(),
        (_, Some(y)) if y != 0.0 => mul_expr(&Expr::constant(1.0 / y), a),
        _ => Expr::from_node(Node::Div(a.clone(), b.clone())),
    }
}

fn neg_expr(a: &Expr) -> Expr {
    mul_expr(&Expr::constant(-1.0), a)
}

macro_rules! bin_op {
    ($tr:ident, $method:ident, $f:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(self, &Expr::constant(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&Expr::constant(self), &rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(&Expr::constant(self), rhs)
            }
        }
    };
}

bin_op!(Add, add, add_expr);
bin_op!(Sub, sub, sub_expr);
bin_op!(Mul, mul, mul_expr);
bin_op!(Div, div, div_expr);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg_expr(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg_expr(self)
    }
}
