//! Boundary point classification, the obstruction term, and the pointwise
//! checks built on top of the frame fields.

use super::{apply_vector_field, step_point, DomainGeometry, GeometryError};
use crate::expr::{conj, differentiate, mul, Evaluator, ScalarField, WirtingerOp};
use crate::types::{Classification, ComplexCovector2, ComplexPoint2, ComplexVector2};
use num_complex::Complex64;

/// Default relative threshold separating weak from strict pseudoconvexity.
pub const TAU_WEAK_DEFAULT: f64 = 1e-8;

/// Default boundary tolerance |rho(p)|.
pub const BOUNDARY_TOL_DEFAULT: f64 = 1e-10;

/// A sampled boundary point with its classification data.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub point: ComplexPoint2,
    /// Wirtinger gradient of rho at the point.
    pub grad: ComplexCovector2,
    /// Tangential Levi eigenvalue H_rho(L, L).
    pub levi_ll: f64,
    pub classification: Classification,
    /// Normal derivative of the tangential Levi eigenvalue, N H_rho(L, L).
    pub obstruction: f64,
}

/// Coefficients of `xi = a L(q) + b N(q)` together with the frame vectors
/// they refer to.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    pub a: Complex64,
    pub b: Complex64,
    pub l: ComplexVector2,
    pub n: ComplexVector2,
}

impl FrameDecomposition {
    pub fn reconstruct(&self) -> ComplexVector2 {
        self.l.scale(self.a).add(&self.n.scale(self.b))
    }
}

/// Classify a boundary point as weakly or strictly pseudoconvex.
///
/// Weak means `H_rho(L,L)(p) < tau_weak * scale` where the scale is the
/// Frobenius norm of the full Levi form clamped below by one, so the
/// threshold is dimensionless.
pub fn classify(
    geom: &DomainGeometry,
    p: ComplexPoint2,
    tau_weak: f64,
    boundary_tol: f64,
) -> Result<Classification, GeometryError> {
    let rho_p = geom.rho_at(p)?;
    if rho_p.abs() > boundary_tol {
        return Err(GeometryError::NotOnBoundary {
            point: p,
            rho: rho_p.abs(),
            tol: boundary_tol,
        });
    }
    let levi = geom.levi_at(p)?;
    let ll = geom.levi_ll_at(p)?;
    Ok(if ll < tau_weak * levi.tolerance_scale() {
        Classification::Weak
    } else {
        Classification::Strict
    })
}

/// The obstruction term `N H_rho(L,L)(p)`.
///
/// The value is real up to rounding at weakly pseudoconvex points; the
/// imaginary part is checked against 1e-10 there.
pub fn obstruction(geom: &DomainGeometry, p: ComplexPoint2) -> Result<f64, GeometryError> {
    let v = Evaluator::new(p).eval(geom.obstruction_field())?;
    Ok(v.re)
}

/// Obstruction value with the weak-point realness contract enforced.
pub fn obstruction_checked(
    geom: &DomainGeometry,
    p: ComplexPoint2,
    classification: Classification,
) -> Result<f64, GeometryError> {
    let v = Evaluator::new(p).eval(geom.obstruction_field())?;
    if classification == Classification::Weak {
        debug_assert!(
            v.im.abs() <= 1e-10 * (1.0 + v.re.abs()),
            "obstruction imaginary part {} at weak point {}",
            v.im,
            p
        );
    }
    Ok(v.re)
}

/// Fit a least-squares slope of log(err) against log(h), using the leading
/// stretch of the data that is still converging. Points past the rounding
/// floor (local slope below 1.0 or non-decreasing error) are excluded, which
/// is the standard way to read a convergence order off a log-log plot.
pub fn convergence_slope(steps: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(steps.len(), errors.len());
    let floor = 1e-14;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (i, (&h, &e)) in steps.iter().zip(errors.iter()).enumerate() {
        let e = e.max(floor);
        if i > 0 {
            let prev = errors[i - 1].max(floor);
            let local = (prev / e).ln() / (steps[i - 1] / h).ln();
            if e >= prev || local < 1.0 {
                break;
            }
        }
        pts.push((h.ln(), e.ln()));
    }
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Check the first-order normal Taylor expansion of `f` at a boundary point:
/// `f(p - d n) - f(p) + 2 d Re(N f)(p)` must shrink like O(d^2).
///
/// Returns the fitted log-log convergence slope of the remainder; exactly
/// quadratic remainders and identically vanishing remainders both count as
/// slope 2.
pub fn taylor_normal_check(
    f: &ScalarField,
    geom: &DomainGeometry,
    p: ComplexPoint2,
    depths: &[f64],
    boundary_tol: f64,
) -> Result<f64, GeometryError> {
    let rho_p = geom.rho_at(p)?;
    if rho_p.abs() > boundary_tol {
        return Err(GeometryError::NotOnBoundary {
            point: p,
            rho: rho_p.abs(),
            tol: boundary_tol,
        });
    }
    let (n_vec, grad_norm) = geom.unit_normal_at(p)?;
    let _ = grad_norm;
    // (N f)(p) through the normalized normal field
    let mut ev = Evaluator::new(p);
    let df = [
        differentiate(f, WirtingerOp::Z1),
        differentiate(f, WirtingerOp::Z2),
    ];
    let nf = n_vec.0[0] * ev.eval(&df[0])? + n_vec.0[1] * ev.eval(&df[1])?;
    let f_p = ev.eval(f)?;

    let mut errs = Vec::with_capacity(depths.len());
    for &d in depths {
        let q = step_point(p, &n_vec, -d);
        let f_q = Evaluator::new(q).eval(f)?;
        let remainder = (f_q - f_p + 2.0 * d * nf.re).norm();
        errs.push(remainder);
    }
    // an identically zero remainder trivially satisfies any order
    if errs.iter().all(|&e| e < 1e-14) {
        return Ok(2.0);
    }
    let mut hs: Vec<f64> = depths.to_vec();
    // largest depth first so the fit reads in the converging direction
    let mut order: Vec<usize> = (0..hs.len()).collect();
    order.sort_by(|&i, &j| hs[j].partial_cmp(&hs[i]).unwrap());
    let hs_sorted: Vec<f64> = order.iter().map(|&i| hs[i]).collect();
    let errs_sorted: Vec<f64> = order.iter().map(|&i| errs[i]).collect();
    hs = hs_sorted;
    // exactly quadratic remainders: slope of the fit is 2 by construction
    Ok(convergence_slope(&hs, &errs_sorted))
}

/// Residual of the weak-tangentiality identity for a complex tangential
/// field X at a weakly pseudoconvex point: with
/// `Y_k = sum_j conj(X_j) dX_k/dzbar_j`, the directional derivative `Y(rho)`
/// must vanish at the point.
pub fn lemma_weak_tangential_check(
    geom: &DomainGeometry,
    x: &[ScalarField; 2],
    p: ComplexPoint2,
    tau_weak: f64,
    boundary_tol: f64,
) -> Result<f64, GeometryError> {
    let class = classify(geom, p, tau_weak, boundary_tol)?;
    if class != Classification::Weak {
        let ll = geom.levi_ll_at(p)?;
        return Err(GeometryError::NotWeak {
            point: p,
            levi_ll: ll,
        });
    }
    // X must be complex tangential at p
    let x_rho = Evaluator::new(p).eval(&apply_vector_field(x, geom.rho()))?;
    if x_rho.norm() > 1e-10 {
        return Err(GeometryError::NotTangential {
            point: p,
            residual: x_rho.norm(),
        });
    }
    // Y_k = sum_j conj(X_j) dX_k/dzbar_j
    let y: [ScalarField; 2] = [build_y_component(x, 0), build_y_component(x, 1)];
    let y_rho = Evaluator::new(p).eval(&apply_vector_field(&y, geom.rho()))?;
    Ok(y_rho.norm())
}

fn build_y_component(x: &[ScalarField; 2], k: usize) -> ScalarField {
    let mut acc = crate::expr::konst_re(0.0);
    for (j, bar) in [(0usize, WirtingerOp::Z1Bar), (1usize, WirtingerOp::Z2Bar)] {
        let term = mul(&conj(&x[j]), &differentiate(&x[k], bar));
        acc = crate::expr::add(&acc, &term);
    }
    acc
}
