//! Built-in example domains, addressable as `catalog:<name>?key=value&..`.

use std::collections::BTreeMap;

use super::shape::{PlaneSet, Shape};
use super::{default_box, DomainSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

pub const CATALOG_NAMES: &[&str] = &[
    "ball",
    "model_type_2k",
    "infinite_type",
    "annulus_times_disc",
    "example2_nonpseudoconvex",
    "square_frame_times_disc",
    "bidisc",
];

const KNOWN_KEYS: &[&str] = &["k", "eps", "n", "r"];

fn positive_int(params: &BTreeMap<String, f64>, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(&v) if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 => Ok(v as usize),
        Some(v) => Err(Error::InvalidParameter(format!(
            "{key} must be a positive integer, got {v}"
        ))),
    }
}

fn positive(params: &BTreeMap<String, f64>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(&v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::InvalidParameter(format!("{key} must be positive, got {v}"))),
    }
}

/// Builds a catalog domain.
///
/// Parameters: `n` and `r` for `ball`, `k` for `model_type_2k`, and `eps`
/// (the curve offset of the harmonic-disc scenario) for
/// `square_frame_times_disc`. Known keys that an entry does not use are
/// echoed but otherwise ignored.
pub fn catalog_domain(name: &str, params: &BTreeMap<String, f64>) -> Result<DomainSpec> {
    if let Some(bad) = params.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!("unknown catalog parameter '{bad}'")));
    }
    let mut spec = match name {
        "ball" => {
            let n = positive_int(params, "n", 2)?;
            let r = positive(params, "r", 1.0)?;
            let mut rho = Expr::constant(-r * r);
            for j in 0..n {
                rho = rho + Expr::abs_sq_z(j);
            }
            DomainSpec::from_rho("ball", n, rho, default_box(n, 1.5 * r))?
        }
        "model_type_2k" => {
            let k = positive_int(params, "k", 1)?;
            let rho = 2.0 * Expr::re_z(1) + Expr::abs_sq_z(0).powi(k as i32);
            DomainSpec::from_rho("model_type_2k", 2, rho, default_box(2, 1.0))?
        }
        "infinite_type" => {
            // |z1|^2 + 2 exp(-1/|z2|^2) - 1, extended by 0 across z2 = 0
            let rho = Expr::abs_sq_z(0) + 2.0 * Expr::abs_sq_z(1).flat(0) - 1.0;
            // exp(-1/|z2|^2) < 1/2 forces |z2|^2 < 1/ln 2
            let mut bbox = default_box(2, 1.1);
            bbox[2] = [-1.25, 1.25];
            bbox[3] = [-1.25, 1.25];
            DomainSpec::from_rho("infinite_type", 2, rho, bbox)?
        }
        "annulus_times_disc" => DomainSpec::from_shape(
            "annulus_times_disc",
            Shape::Product {
                factors: vec![
                    PlaneSet::Annulus { inner: 0.5, outer: 2.0 },
                    PlaneSet::Disc { radius: 1.0 },
                ],
            },
            vec![[-2.0, 2.0], [-2.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]],
        ),
        "example2_nonpseudoconvex" => DomainSpec::from_shape(
            "example2_nonpseudoconvex",
            // (A x D) u (D(0,2) x {Re w < -3/4}) equals the bidisc
            // D(0,2) x D minus the closed set |z1| <= 1/2, Re w >= -3/4
            Shape::Difference {
                outer: vec![PlaneSet::Disc { radius: 2.0 }, PlaneSet::Disc { radius: 1.0 }],
                hole: vec![
                    PlaneSet::Disc { radius: 0.5 },
                    PlaneSet::CutDisc {
                        radius: 1.0,
                        cut: -0.75,
                    },
                ],
            },
            vec![[-2.0, 2.0], [-2.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]],
        ),
        "square_frame_times_disc" => {
            positive(params, "eps", 0.01)?;
            DomainSpec::from_shape(
                "square_frame_times_disc",
                Shape::Product {
                    factors: vec![
                        PlaneSet::Disc { radius: 3.0 },
                        PlaneSet::SquareFrame { inner: 1.0, outer: 3.0 },
                    ],
                },
                vec![[-3.0, 3.0]; 4],
            )
        }
        "bidisc" => DomainSpec::from_shape(
            "bidisc",
            Shape::Product {
                factors: vec![PlaneSet::Disc { radius: 1.0 }, PlaneSet::Disc { radius: 1.0 }],
            },
            vec![[-1.0, 1.0]; 4],
        ),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    spec.params = params.clone();
    let query: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    spec.catalog_uri = Some(if query.is_empty() {
        format!("catalog:{name}")
    } else {
        format!("catalog:{name}?{}", query.join("&"))
    });
    Ok(spec)
}

/// Parses `catalog:<name>?k=2&eps=0.01`.
pub fn parse_catalog_uri(uri: &str) -> Result<DomainSpec> {
    let rest = uri
        .strip_prefix("catalog:")
        .ok_or_else(|| Error::InvalidParameter(format!("'{uri}' is not a catalog URI")))?;
    let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
    let mut params = BTreeMap::new();
    for pair in query.split('&').filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("malformed catalog parameter '{pair}'")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("catalog parameter {k} is not a number: '{v}'")))?;
        params.insert(k.to_string(), v);
    }
    catalog_domain(name, &params)
}
