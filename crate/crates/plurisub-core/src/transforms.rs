//! Modified defining functions and exhaustion functions.
//!
//! Starting from a defining function rho that is plurisubharmonic on the
//! boundary, this module constructs
//!
//! * `sigma = |H_rho(N, L)|^2`, the squared mixed Levi term whose
//!   exponential damps the obstruction,
//! * `r = rho * exp(-C sigma)` (interior) and `rho * exp(+C sigma)`
//!   (exterior),
//! * `r1 = r + K r^2`,
//! * `g1 = -(-r e^{-delta |z|^2})^eta` for eta in (0,1) on the inside and
//!   `g2 = (r e^{delta |z|^2})^eta` for eta > 1 on the outside,
//!
//! together with the sampled constants (`c3`, `c4`, the largest obstruction
//! value) that pick `C` and `delta`.

use crate::expr::{abs2, add, conj, div, exp, mul, neg, powf, powi, ScalarField};
use crate::geometry::{BoundaryPoint, DomainGeometry};
use crate::types::{Classification, ComplexPoint2, Side};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("empty sample set: {0}")]
    EmptySamples(&'static str),
    #[error("collar sample at {point} has |rho| = {rho:e} below the quotient guard")]
    CollarRhoTooSmall { point: ComplexPoint2, rho: f64 },
    #[error("obstruction value {a:e} too close to zero for the multiplier formula")]
    DegenerateObstruction { a: f64 },
    #[error("invalid parameter: {0}")]
    BadParams(String),
}

/// Parameters of the modified defining functions and exhaustion functions.
///
/// Built through [`TransformParams::for_exponent`], which ties `delta` to
/// the exponent and the region radius, so the relation
/// `delta = (1 - eta) / (2 eta D)` (reflected outside) holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransformParams {
    /// Multiplier of sigma in the exponential damping factor.
    pub c: f64,
    /// Quadratic boost coefficient.
    pub k: f64,
    /// Target Hessian slack.
    pub epsilon: f64,
    /// Exhaustion exponent.
    pub eta: f64,
    /// Multiplier of |z|^2 in the exhaustion weight.
    pub delta: f64,
    /// max |z|^2 over the verification region.
    pub d_max: f64,
    pub side: Side,
}

impl TransformParams {
    /// Parameters for one exhaustion exponent. `delta` comes from
    /// [`choose_delta`] and the slack is a quarter of it, which is what the
    /// exhaustion Hessian bound consumes.
    pub fn for_exponent(
        eta: f64,
        d_max: f64,
        side: Side,
        c: f64,
        k: f64,
    ) -> Result<Self, TransformError> {
        let delta = choose_delta(eta, d_max, side)?;
        Ok(TransformParams {
            c,
            k,
            epsilon: delta / 4.0,
            eta,
            delta,
            d_max,
            side,
        })
    }
}

/// Constants estimated from boundary and collar samples.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstantEstimates {
    /// Sampled minimum of |d rho| over the boundary.
    pub c3: f64,
    /// Sampled maximum of dist/|rho| over the collar.
    pub c4: f64,
    /// Largest obstruction value over weak samples, zero when none exist.
    pub a_max: f64,
}

/// A collar sample: an off-boundary point, its boundary foot point and the
/// signed distance (negative inside).
#[derive(Debug, Clone)]
pub struct CollarSample {
    pub q: ComplexPoint2,
    pub p: ComplexPoint2,
    pub d: f64,
    /// Index into the boundary sample list the collar was grown from.
    pub boundary_idx: usize,
}

/// `sigma = |H_rho(N, L)|^2`, assembled as `|P|^2 / (|d rho|^2)^2` from the
/// unnormalized frame so no square root appears.
pub fn sigma(rho: &ScalarField) -> ScalarField {
    let geom = DomainGeometry::new(rho.clone());
    sigma_from_geometry(&geom)
}

/// Same as [`sigma`] but reusing an already built geometry.
pub fn sigma_from_geometry(geom: &DomainGeometry) -> ScalarField {
    let hess = geom.hessian();
    let rho_z = geom.rho_z();
    let rho_zbar = geom.rho_zbar();
    // unnormalized N and L components
    let n_u = [rho_zbar[0].clone(), rho_zbar[1].clone()];
    let l_u = [rho_z[1].clone(), neg(&rho_z[0])];
    let mut p = crate::expr::konst_re(0.0);
    #[allow(clippy::needless_range_loop)]
    for j in 0..2 {
        for k in 0..2 {
            let term = mul(&hess.entries[j][k], &mul(&n_u[j], &conj(&l_u[k])));
            p = add(&p, &term);
        }
    }
    let q = geom.grad_norm_sq_field();
    div(&abs2(&p), &mul(q, q))
}

/// The damped defining function `rho * exp(-C sigma)` (interior side) or
/// `rho * exp(+C sigma)` (exterior side).
pub fn modified_defining(rho: &ScalarField, c: f64, side: Side) -> ScalarField {
    let s = sigma(rho);
    modified_defining_with_sigma(rho, &s, c, side)
}

pub fn modified_defining_with_sigma(
    rho: &ScalarField,
    sigma: &ScalarField,
    c: f64,
    side: Side,
) -> ScalarField {
    if c == 0.0 {
        return rho.clone();
    }
    let signed_c = match side {
        Side::Interior => -c,
        Side::Exterior => c,
    };
    mul(rho, &exp(&mul(&crate::expr::konst_re(signed_c), sigma)))
}

/// `r + K r^2`.
pub fn quadratic_boost(r: &ScalarField, k: f64) -> ScalarField {
    if k == 0.0 {
        return r.clone();
    }
    add(r, &mul(&crate::expr::konst_re(k), &powi(r, 2)))
}

/// Estimate `c3` (minimum boundary gradient), `c4` (distance-to-defining
///-function quotient) and the largest weak obstruction from samples.
pub fn estimate_constants(
    geom: &DomainGeometry,
    boundary: &[BoundaryPoint],
    collar: &[CollarSample],
) -> Result<ConstantEstimates, TransformError> {
    if boundary.is_empty() {
        return Err(TransformError::EmptySamples("boundary"));
    }
    if collar.is_empty() {
        return Err(TransformError::EmptySamples("collar"));
    }
    let mut c3 = f64::INFINITY;
    for bp in boundary {
        c3 = c3.min(bp.grad.norm());
    }
    let mut c4: f64 = 0.0;
    for cs in collar {
        let rho_q = geom
            .rho_at(cs.q)
            .map_err(|e| TransformError::BadParams(e.to_string()))?;
        if rho_q.abs() <= 1e-14 {
            return Err(TransformError::CollarRhoTooSmall {
                point: cs.q,
                rho: rho_q.abs(),
            });
        }
        c4 = c4.max(cs.d.abs() / rho_q.abs());
    }
    let mut a_max: f64 = 0.0;
    for bp in boundary {
        if bp.classification == Classification::Weak {
            a_max = a_max.max(bp.obstruction);
        }
    }
    Ok(ConstantEstimates { c3, c4, a_max })
}

/// The damping multiplier
/// `C = max(0, max over weak samples of (-eps/(16 c4) + A) / (c3 A^2))`.
///
/// Samples with `A = 0` contribute zero (the ratio limit when the numerator
/// is negative). A near-zero `A` paired with a positive numerator cannot
/// arise for positive slack, but the guard keeps the formula total.
pub fn choose_c(
    epsilon: f64,
    est: &ConstantEstimates,
    weak_obstructions: &[f64],
) -> Result<f64, TransformError> {
    if epsilon <= 0.0 {
        return Err(TransformError::BadParams(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if est.c3 <= 0.0 || est.c4 <= 0.0 {
        return Err(TransformError::BadParams(format!(
            "need positive constants, got c3 = {}, c4 = {}",
            est.c3, est.c4
        )));
    }
    let slack = epsilon / (16.0 * est.c4);
    let mut c: f64 = 0.0;
    for &a in weak_obstructions {
        let numerator = -slack + a;
        if a.abs() < 1e-12 {
            if numerator > 0.0 {
                return Err(TransformError::DegenerateObstruction { a });
            }
            continue;
        }
        c = c.max(numerator / (est.c3 * a * a));
    }
    Ok(c.max(0.0))
}

/// `delta = (1 - eta) / (2 eta D)` inside, `(eta - 1) / (2 eta D)` outside.
pub fn choose_delta(eta: f64, d_max: f64, side: Side) -> Result<f64, TransformError> {
    if d_max <= 0.0 {
        return Err(TransformError::BadParams(format!(
            "D must be positive, got {d_max}"
        )));
    }
    match side {
        Side::Interior => {
            if !(0.0 < eta && eta < 1.0) {
                return Err(TransformError::BadParams(format!(
                    "interior exponent must lie in (0,1), got {eta}"
                )));
            }
            Ok((1.0 - eta) / (2.0 * eta * d_max))
        }
        Side::Exterior => {
            if eta <= 1.0 {
                return Err(TransformError::BadParams(format!(
                    "exterior exponent must exceed 1, got {eta}"
                )));
            }
            Ok((eta - 1.0) / (2.0 * eta * d_max))
        }
    }
}

fn z_norm_sq() -> ScalarField {
    add(&abs2(&crate::expr::z1()), &abs2(&crate::expr::z2()))
}

/// Interior exhaustion `g1 = -(-r e^{-delta |z|^2})^eta` for eta in (0,1]
/// (eta = 1 with delta = 0 degenerates to r itself and is allowed for
/// testing). Evaluation on the side where r > 0 fails fast.
pub fn df_interior(r: &ScalarField, eta: f64, delta: f64) -> Result<ScalarField, TransformError> {
    if !(0.0 < eta && eta <= 1.0) {
        return Err(TransformError::BadParams(format!(
            "interior exponent must lie in (0,1], got {eta}"
        )));
    }
    if delta < 0.0 {
        return Err(TransformError::BadParams(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let weight = exp(&mul(&crate::expr::konst_re(-delta), &z_norm_sq()));
    let base = mul(&neg(r), &weight);
    Ok(neg(&powf(&base, eta)))
}

/// Exterior exhaustion `g2 = (r e^{delta |z|^2})^eta` for eta >= 1.
/// Evaluation on the side where r < 0 fails fast.
pub fn df_exterior(r: &ScalarField, eta: f64, delta: f64) -> Result<ScalarField, TransformError> {
    if eta < 1.0 {
        return Err(TransformError::BadParams(format!(
            "exterior exponent must be at least 1, got {eta}"
        )));
    }
    if delta < 0.0 {
        return Err(TransformError::BadParams(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let weight = exp(&mul(&crate::expr::konst_re(delta), &z_norm_sq()));
    let base = mul(r, &weight);
    Ok(powf(&base, eta))
}
