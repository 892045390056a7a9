use std::collections::HashMap;
use std::sync::Arc;

use super::{checked_div, checked_ln, checked_powi, checked_sqrt, finite, flat_value, Expr, Inner, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Powi(u32, i32),
    Exp(u32),
    Log(u32),
    Sqrt(u32),
    Flat(u32, u32),
}

/// Straight-line program evaluating several expressions at once.
///
/// Shared and structurally equal subtrees are emitted once, so a defining function together with its
/// gradient costs little more than the gradient alone. Used in the sampling
/// loops where the tree walk of [`Expr::eval`] would dominate.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    dim: usize,
}

impl Tape {
    /// Compiles `exprs` for points with `dim` real coordinates.
    pub fn compile(exprs: &[Expr], dim: usize) -> Result<Tape> {
        let mut em = Emitter::default();
        let mut outputs = Vec::with_capacity(exprs.len());
        for e in exprs {
            e.check_vars(dim)?;
            outputs.push(em.emit(e));
        }
        Ok(Tape {
            ops: em.ops,
            outputs,
            dim,
        })
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Evaluates all outputs at `x`, using `scratch` as the register file.
    pub fn eval_with(&self, x: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        if x.len() < self.dim {
            return Err(Error::VariableOutOfRange {
                index: self.dim - 1,
                dim: x.len(),
            });
        }
        scratch.clear();
        scratch.reserve(self.ops.len());
        for op in &self.ops {
            let r = |k: &u32| scratch[*k as usize];
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(i) => x[*i],
                Op::Add(a, b) => r(a) + r(b),
                Op::Sub(a, b) => r(a) - r(b),
                Op::Mul(a, b) => r(a) * r(b),
                Op::Div(a, b) => checked_div(r(a), r(b))?,
                Op::Powi(a, n) => checked_powi(r(a), *n)?,
                Op::Exp(a) => finite(r(a).exp())?,
                Op::Log(a) => checked_ln(r(a))?,
                Op::Sqrt(a) => checked_sqrt(r(a))?,
                Op::Flat(a, p) => flat_value(r(a), *p),
            };
            scratch.push(v);
        }
        for (o, &k) in out.iter_mut().zip(&self.outputs) {
            *o = finite(scratch[k as usize])?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_with(x, &mut scratch, &mut out)?;
        Ok(out)
    }
}

/// Structural key of an op, with constants compared bitwise.
#[derive(Hash, PartialEq, Eq)]
struct OpKey(u8, u64, u64);

fn op_key(op: &Op) -> OpKey {
    match *op {
        Op::Const(c) => OpKey(0, c.to_bits(), 0),
        Op::Var(i) => OpKey(1, i as u64, 0),
        // commutative ops are keyed with sorted operands
        Op::Add(a, b) => OpKey(2, a.min(b) as u64, a.max(b) as u64),
        Op::Sub(a, b) => OpKey(3, a as u64, b as u64),
        Op::Mul(a, b) => OpKey(4, a.min(b) as u64, a.max(b) as u64),
        Op::Div(a, b) => OpKey(5, a as u64, b as u64),
        Op::Powi(a, n) => OpKey(6, a as u64, n as u32 as u64),
        Op::Exp(a) => OpKey(7, a as u64, 0),
        Op::Log(a) => OpKey(8, a as u64, 0),
        Op::Sqrt(a) => OpKey(9, a as u64, 0),
        Op::Flat(a, p) => OpKey(10, a as u64, p as u64),
    }
}

#[derive(Default)]
struct Emitter {
    ops: Vec<Op>,
    by_ptr: HashMap<*const Inner, u32>,
    by_value: HashMap<OpKey, u32>,
}

impl Emitter {
    fn emit(&mut self, e: &Expr) -> u32 {
        let key = Arc::as_ptr(&e.0);
        if let Some(&k) = self.by_ptr.get(&key) {
            return k;
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Var(i) => Op::Var(*i),
            Node::Add(a, b) => Op::Add(self.emit(a), self.emit(b)),
            Node::Sub(a, b) => Op::Sub(self.emit(a), self.emit(b)),
            Node::Mul(a, b) => Op::Mul(self.emit(a), self.emit(b)),
            Node::Div(a, b) => Op::Div(self.emit(a), self.emit(b)),
            Node::Powi(a, n) => Op::Powi(self.emit(a), *n),
            Node::Exp(a) => Op::Exp(self.emit(a)),
            Node::Log(a) => Op::Log(self.emit(a)),
            Node::Sqrt(a) => Op::Sqrt(self.emit(a)),
            Node::Flat(a, p) => Op::Flat(self.emit(a), *p),
        };
        let k = *self.by_value.entry(op_key(&op)).or_insert_with(|| {
            self.ops.push(op);
            (self.ops.len() - 1) as u32
        });
        self.by_ptr.insert(key, k);
        k
    }
}
