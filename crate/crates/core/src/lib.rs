//! Boundary geometry of smoothly bounded domains `{rho < 0}` in `C^n`.
//!
//! The crate evaluates defining functions given as expression trees and
//! builds on them: tangent frames, the real Hessian and Levi forms, sampled
//! Hartogs checks, analytic-disc containment tests, and finite type measured
//! both by contact order of discs and by iterated brackets of tangent
//! holomorphic vector fields.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod disc;
pub mod domain;
pub mod error;
pub mod expr;
pub mod finite_type;
pub mod forms;
pub mod linalg;
pub mod par;
pub mod scenarios;

pub use error::{Error, Result};
