//! Tangent holomorphic vector fields and their iterated brackets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TypeValue;
use crate::domain::{BoundaryPoint, DomainSpec, GRAD_FLOOR};
use crate::error::{Error, Result};
use crate::expr::jet::{CPoly, TPoly};
use crate::expr::CExpr;
use crate::forms::wirtinger_gradient;
use crate::linalg::norm;

/// `sum_j a_j d/dz_j + sum_j b_j d/dzbar_j` with symbolic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub holo: Vec<CExpr>,
    pub anti: Vec<CExpr>,
    /// Commutator order; the generating fields have order 1.
    pub order: usize,
}

impl VectorField {
    pub fn zero(n: usize, order: usize) -> Self {
        VectorField {
            holo: vec![CExpr::zero(); n],
            anti: vec![CExpr::zero(); n],
            order,
        }
    }

    /// `d/dz_j`, or `d/dzbar_j` when `conjugate`.
    pub fn coordinate(n: usize, j: usize, conjugate: bool) -> Self {
        let mut f = VectorField::zero(n, 1);
        let one = CExpr::real(crate::expr::Expr::one());
        if conjugate {
            f.anti[j] = one;
        } else {
            f.holo[j] = one;
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.holo.len()
    }

    pub fn is_zero(&self) -> bool {
        self.holo.iter().chain(&self.anti).all(CExpr::is_zero)
    }

    /// Total node count of the coefficient trees.
    pub fn size(&self) -> usize {
        self.holo.iter().chain(&self.anti).map(CExpr::size).sum()
    }

    /// The conjugate field: `conj(a_j) d/dzbar_j + conj(b_j) d/dz_j`.
    pub fn conj(&self) -> Self {
        VectorField {
            holo: self.anti.iter().map(CExpr::conj).collect(),
            anti: self.holo.iter().map(CExpr::conj).collect(),
            order: self.order,
        }
    }

    /// The derivative `F f` of a complex function.
    pub fn apply(&self, f: &CExpr) -> CExpr {
        let mut acc = CExpr::zero();
        for j in 0..self.dim() {
            if !self.holo[j].is_zero() {
                acc = acc.add(&self.holo[j].mul(&f.wirtinger(j, false)));
            }
            if !self.anti[j].is_zero() {
                acc = acc.add(&self.anti[j].mul(&f.wirtinger(j, true)));
            }
        }
        acc
    }

    /// Coefficients `(a(x), b(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let a = self.holo.iter().map(|c| c.eval(x)).collect::<Result<_>>()?;
        let b = self.anti.iter().map(|c| c.eval(x)).collect::<Result<_>>()?;
        Ok((a, b))
    }

    /// `<F, d rho>(x) = sum_j a_j rho_{z_j}`: only the `(1,0)` part pairs with
    /// the `(1,0)`-form `d rho`.
    pub fn pairing(&self, spec: &DomainSpec, x: &[f64]) -> Result<Complex64> {
        let (_, g) = spec.value_and_grad(x)?;
        let gz = wirtinger_gradient(&g);
        let (a, _) = self.eval(x)?;
        Ok(a.iter().zip(&gz).map(|(a, r)| a * r).sum())
    }

    /// `sum_j a_j rho_{z_j} + b_j rho_{zbar_j}`, the derivative of `rho`
    /// along the field. Vanishes identically for tangent fields.
    pub fn tangency_residual(&self, spec: &DomainSpec, x: &[f64]) -> Result<Complex64> {
        let (_, g) = spec.value_and_grad(x)?;
        let gz = wirtinger_gradient(&g);
        let (a, b) = self.eval(x)?;
        Ok(a.iter().zip(&gz).map(|(a, r)| a * r).sum::<Complex64>()
            + b.iter().zip(&gz).map(|(b, r)| b * r.conj()).sum::<Complex64>())
    }
}

/// `[F, G]` with coefficients `F(g) - G(f)`.
pub fn bracket(f: &VectorField, g: &VectorField) -> VectorField {
    let comp = |fc: &[CExpr], gc: &[CExpr]| -> Vec<CExpr> {
        fc.iter().zip(gc).map(|(a, b)| f.apply(b).sub(&g.apply(a))).collect()
    };
    VectorField {
        holo: comp(&f.holo, &g.holo),
        anti: comp(&f.anti, &g.anti),
        order: f.order + g.order,
    }
}

/// [`bracket`] with a cap on the coefficient tree size.
pub fn bracket_within(f: &VectorField, g: &VectorField, budget: usize) -> Result<VectorField> {
    let b = bracket(f, g);
    let nodes = b.size();
    if nodes > budget {
        return Err(Error::ExpressionBlowup { nodes, budget });
    }
    Ok(b)
}

/// Index of the normal slot: `z_2` in `C^2`, otherwise the coordinate with
/// the largest `|rho_{z_k}(P)|`.
fn pivot(spec: &DomainSpec, p: &BoundaryPoint) -> Result<usize> {
    let (_, g) = spec.value_and_grad(&p.coords)?;
    let gn = norm(&g);
    if gn < GRAD_FLOOR {
        return Err(Error::DegenerateGradient(gn));
    }
    if spec.n == 2 {
        return Ok(1);
    }
    let gz = wirtinger_gradient(&g);
    Ok((0..spec.n)
        .max_by(|&a, &b| gz[a].norm().total_cmp(&gz[b].norm()))
        .unwrap_or(0))
}

/// `L_j = rho_{z_k} d/dz_j - rho_{z_j} d/dz_k` for `j != k`, where `k` is
/// the normal slot (`z_2` for `n = 2`).
pub fn tangent_fields(spec: &DomainSpec, p: &BoundaryPoint) -> Result<Vec<VectorField>> {
    let rho = spec.require_rho()?;
    let k = pivot(spec, p)?;
    let rz: Vec<CExpr> = (0..spec.n)
        .map(|j| {
            let (re, im) = rho.wirtinger(j, false);
            CExpr::new(re, im)
        })
        .collect();
    Ok((0..spec.n)
        .filter(|&j| j != k)
        .map(|j| {
            let mut f = VectorField::zero(spec.n, 1);
            f.holo[j] = rz[k].clone();
            f.holo[k] = rz[j].neg();
            f
        })
        .collect())
}

/// A vector field with coefficients replaced by their Taylor jets at `P`.
#[derive(Clone)]
struct JetField {
    holo: Vec<CPoly>,
    anti: Vec<CPoly>,
}

impl JetField {
    fn apply(&self, f: &CPoly) -> CPoly {
        let mut acc = f.constant_like(Complex64::new(0.0, 0.0));
        for j in 0..self.holo.len() {
            acc = acc.add(&self.holo[j].mul(&f.wirtinger(j, false)));
            acc = acc.add(&self.anti[j].mul(&f.wirtinger(j, true)));
        }
        acc
    }

    fn bracket(&self, g: &JetField) -> JetField {
        let comp = |fc: &[CPoly], gc: &[CPoly]| -> Vec<CPoly> {
            fc.iter().zip(gc).map(|(a, b)| self.apply(b).sub(&g.apply(a))).collect()
        };
        JetField {
            holo: comp(&self.holo, &g.holo),
            anti: comp(&self.anti, &g.anti),
        }
    }

    fn conj(&self) -> JetField {
        JetField {
            holo: self.anti.iter().map(CPoly::conj).collect(),
            anti: self.holo.iter().map(CPoly::conj).collect(),
        }
    }

    fn coeffs(&self) -> impl Iterator<Item = &CPoly> {
        self.holo.iter().chain(&self.anti)
    }

    fn value_norm(&self) -> f64 {
        self.coeffs().map(|c| c.value().norm()).fold(0.0, f64::max)
    }

    fn max_abs(&self) -> f64 {
        self.coeffs().map(CPoly::max_abs).fold(0.0, f64::max)
    }

    fn max_diff(&self, o: &JetField, sign: f64) -> f64 {
        self.coeffs()
            .zip(o.coeffs())
            .flat_map(|(a, b)| {
                let (ar, ai) = (a.re.coeffs(), a.im.coeffs());
                let (br, bi) = (b.re.coeffs(), b.im.coeffs());
                (0..ar.len()).map(move |i| (ar[i] - sign * br[i]).abs().max((ai[i] - sign * bi[i]).abs()))
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub value: TypeValue,
    /// `<N, d rho>(P)` of the first commutator that pairs nontrivially.
    pub pairing: Option<[f64; 2]>,
    /// Distinct nonzero commutators examined at each order `1, 2, ..`.
    pub fields_per_order: Vec<usize>,
    /// Largest `|<N, d rho>| / threshold` among the commutators below the
    /// returned order; below 1 by construction.
    pub max_lower_ratio: f64,
    /// Index of the normal slot used to build the generating frame.
    pub normal_slot: usize,
    /// The field budget ran out before the cutoff.
    pub budget_exhausted: bool,
}

/// Relative zero threshold for `<N, d rho>(P)`.
pub const PAIRING_REL_TOL: f64 = 1e-8;

/// Smallest `m <= cutoff` such that some left-nested commutator
/// `[..[[G_1, G_2], G_3].., G_m]` of the fields `L_j`, `conj(L_j)` satisfies
/// `<N, d rho>(P) != 0`.
///
/// The fields are propagated as Taylor jets of `rho` at `P` of order
/// `cutoff + 1`, which is exact for the pairing at `P` since each bracket
/// costs one derivative. Duplicate commutators (up to sign) and zero ones are
/// pruned level by level. `max_fields` caps the number of commutators kept at
/// one order; when exceeded the result is a lower bound flagged in the report.
pub fn commutator_type(
    spec: &DomainSpec,
    p: &BoundaryPoint,
    cutoff: usize,
    max_fields: usize,
) -> Result<CommutatorReport> {
    let rho = spec.require_rho()?;
    if cutoff < 2 {
        return Err(Error::InvalidParameter("cutoff must be at least 2".into()));
    }
    let k = pivot(spec, p)?;
    let n = spec.n;
    let nv = 2 * n;
    let inputs: Vec<TPoly> = (0..nv)
        .map(|i| TPoly::variable(nv, cutoff + 1, i, p.coords[i]))
        .collect();
    let rho_jet = CPoly::real(rho.taylor(&inputs)?);
    let rz: Vec<CPoly> = (0..n).map(|j| rho_jet.wirtinger(j, false)).collect();
    let rz_at: Vec<Complex64> = rz.iter().map(CPoly::value).collect();
    let dr_norm = rz_at.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let zero = rz[0].constant_like(Complex64::new(0.0, 0.0));

    let mut gens = Vec::new();
    for j in (0..n).filter(|&j| j != k) {
        let mut holo = vec![zero.clone(); n];
        holo[j] = rz[k].clone();
        holo[k] = rz[j].neg();
        let l = JetField {
            holo,
            anti: vec![zero.clone(); n],
        };
        gens.push(l.conj());
        gens.push(l);
    }
    // (1,0) fields first so that [L, conj L] comes out first at order 2
    gens.reverse();
    let gen_scale = gens.iter().map(JetField::value_norm).fold(0.0, f64::max);

    let mut report = CommutatorReport {
        value: TypeValue::saturated(cutoff),
        pairing: None,
        fields_per_order: Vec::new(),
        max_lower_ratio: 0.0,
        normal_slot: k,
        budget_exhausted: false,
    };
    let mut level = gens.clone();
    for order in 1..=cutoff {
        report.fields_per_order.push(level.len());
        let floor = gen_scale.powi(order as i32);
        for f in &level {
            let pairing: Complex64 = f.holo.iter().zip(&rz_at).map(|(a, r)| a.value() * r).sum();
            let threshold = PAIRING_REL_TOL * f.value_norm().max(floor) * dr_norm;
            let ratio = pairing.norm() / threshold;
            if ratio > 1.0 {
                report.value = TypeValue::exact(order);
                report.pairing = Some([pairing.re, pairing.im]);
                return Ok(report);
            }
            report.max_lower_ratio = report.max_lower_ratio.max(ratio);
        }
        if order == cutoff {
            break;
        }
        let mut next: Vec<JetField> = Vec::new();
        'outer: for f in &level {
            for g in &gens {
                let b = f.bracket(g);
                let scale = b.max_abs();
                if scale <= 1e-13 * floor * gen_scale {
                    continue;
                }
                let tol = 1e-12 * scale;
                if next
                    .iter()
                    .any(|m| m.max_diff(&b, 1.0) <= tol || m.max_diff(&b, -1.0) <= tol)
                {
                    continue;
                }
                if next.len() == max_fields {
                    report.budget_exhausted = true;
                    break 'outer;
                }
                next.push(b);
            }
        }
        if next.is_empty() {
            // every higher commutator vanishes identically near P
            break;
        }
        level = next;
    }
    Ok(report)
}
