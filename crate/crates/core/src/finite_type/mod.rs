//! Finite type of boundary points: contact order of analytic discs against
//! the order of iterated brackets of tangent holomorphic fields.

mod fields;
mod geometric;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::disc::AnalyticDisc;
use crate::domain::{BoundaryPoint, DomainSpec};
use crate::error::Result;
use crate::expr::curve::JET_ZERO_REL;
use crate::par::Execution;

pub use fields::{
    bracket, bracket_within, commutator_type, tangent_fields, CommutatorReport, VectorField, PAIRING_REL_TOL,
};
pub use geometric::{contact_order, geometric_type, GeometricResult, SOLVE_TOL};

/// A type order `m`, or `>= cutoff` when nothing nonzero was seen up to the
/// cutoff. Serializes as an integer or as the string `"≥M"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeValue {
    pub order: usize,
    pub saturated: bool,
}

impl TypeValue {
    pub fn exact(order: usize) -> Self {
        TypeValue {
            order,
            saturated: false,
        }
    }

    pub fn saturated(cutoff: usize) -> Self {
        TypeValue {
            order: cutoff,
            saturated: true,
        }
    }

    /// Sort key: saturated values rank above every exact order.
    pub fn rank(&self) -> (bool, usize) {
        (self.saturated, self.order)
    }
}

impl fmt::Display for TypeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.saturated {
            write!(f, "≥{}", self.order)
        } else {
            write!(f, "{}", self.order)
        }
    }
}

impl Serialize for TypeValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.saturated {
            s.serialize_str(&self.to_string())
        } else {
            s.serialize_u64(self.order as u64)
        }
    }
}

impl<'de> Deserialize<'de> for TypeValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(m) => Ok(TypeValue::exact(m)),
            Raw::Text(t) => t
                .trim_start_matches('≥')
                .trim_start_matches(">=")
                .parse()
                .map(TypeValue::saturated)
                .map_err(|_| serde::de::Error::custom(format!("bad type value '{t}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeConfig {
    /// Largest disc degree in the geometric search.
    pub degree: usize,
    /// Cutoff `M` for the geometric side.
    pub cutoff: usize,
    /// Cutoff for the commutator side; defaults to `cutoff`.
    pub commutator_cutoff: Option<usize>,
    /// Distinct commutators kept per order.
    pub max_fields: usize,
    pub execution: Execution,
}

impl Default for TypeConfig {
    fn default() -> Self {
        TypeConfig {
            degree: 6,
            cutoff: 8,
            commutator_cutoff: None,
            max_fields: 4096,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    pub point: Vec<f64>,
    pub cutoff: usize,
    pub commutator_cutoff: usize,
    pub degree: usize,
    pub geometric_type: TypeValue,
    /// Re-checkable with [`contact_order`].
    pub witness_disc: AnalyticDisc,
    /// `witness'(0)`, the tangent direction of the witness.
    pub direction: Vec<[f64; 2]>,
    pub commutator_type: TypeValue,
    pub agree: bool,
    /// `"theorem"` in `C^2`; `"experimental"` in higher dimensions, where the
    /// answer may depend on the generating frame.
    pub comparison: String,
    pub normal_slot: usize,
    pub commutator_pairing: Option<[f64; 2]>,
    pub fields_per_order: Vec<usize>,
    pub directions_tried: usize,
    pub geometric_budget_exhausted: bool,
    pub commutator_budget_exhausted: bool,
    pub pairing_rel_tol: f64,
    pub jet_zero_rel: f64,
}

/// Equal exact orders, or both sides saturated at their cutoffs.
pub fn types_agree(a: TypeValue, b: TypeValue) -> bool {
    if a.saturated || b.saturated {
        a.saturated && b.saturated
    } else {
        a.order == b.order
    }
}

/// Runs both type computations at `P` and compares them.
pub fn bloom_graham_check(spec: &DomainSpec, p: &BoundaryPoint, cfg: &TypeConfig) -> Result<TypeReport> {
    let ccut = cfg.commutator_cutoff.unwrap_or(cfg.cutoff);
    let g = geometric_type(spec, p, cfg.degree, cfg.cutoff, cfg.execution)?;
    let c = commutator_type(spec, p, ccut, cfg.max_fields)?;
    Ok(TypeReport {
        point: p.coords.clone(),
        cutoff: cfg.cutoff,
        commutator_cutoff: ccut,
        degree: cfg.degree,
        agree: types_agree(g.value, c.value),
        geometric_type: g.value,
        direction: g.direction.iter().map(|z| [z.re, z.im]).collect(),
        witness_disc: g.witness,
        commutator_type: c.value,
        comparison: if spec.n == 2 { "theorem" } else { "experimental" }.into(),
        normal_slot: c.normal_slot,
        commutator_pairing: c.pairing,
        fields_per_order: c.fields_per_order,
        directions_tried: g.directions_tried,
        geometric_budget_exhausted: g.budget_exhausted,
        commutator_budget_exhausted: c.budget_exhausted,
        pairing_rel_tol: PAIRING_REL_TOL,
        jet_zero_rel: JET_ZERO_REL,
    })
}
