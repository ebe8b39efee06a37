//! Central-difference oracle for the symbolic Wirtinger engine.
//!
//! The numeric derivative is assembled from first-order central differences
//! on the four underlying real coordinates, recombined into Wirtinger form
//! (d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2) and composed
//! recursively for higher orders. Truncation is O(h^2) at every order; the
//! subtractive rounding floor grows like eps/h^order, so step sizes must stay
//! above roughly 1e-4 for third-order indices.

use super::{EvalError, Evaluator, ScalarField, WirtingerIndex, WirtingerOp};
use crate::expr::wirtinger;
use crate::types::ComplexPoint2;
use num_complex::Complex64;

fn shift(q: ComplexPoint2, var: usize, re_step: f64, im_step: f64) -> ComplexPoint2 {
    let delta = Complex64::new(re_step, im_step);
    match var {
        0 => ComplexPoint2::new(q.z1 + delta, q.z2),
        _ => ComplexPoint2::new(q.z1, q.z2 + delta),
    }
}

/// Numeric Wirtinger derivative of `f` along `ops` (applied left to right)
/// using central differences with step `h` on the real coordinates.
pub fn fd_wirtinger(
    f: &ScalarField,
    ops: &[WirtingerOp],
    q: ComplexPoint2,
    h: f64,
) -> Result<Complex64, EvalError> {
    match ops.split_first() {
        None => Evaluator::new(q).eval(f),
        Some((&op, rest)) => {
            let (var, bar) = match op {
                WirtingerOp::Z1 => (0, false),
                WirtingerOp::Z2 => (1, false),
                WirtingerOp::Z1Bar => (0, true),
                WirtingerOp::Z2Bar => (1, true),
            };
            let dx = (fd_wirtinger(f, rest, shift(q, var, h, 0.0), h)?
                - fd_wirtinger(f, rest, shift(q, var, -h, 0.0), h)?)
                / (2.0 * h);
            let dy = (fd_wirtinger(f, rest, shift(q, var, 0.0, h), h)?
                - fd_wirtinger(f, rest, shift(q, var, 0.0, -h), h)?)
                / (2.0 * h);
            let i = Complex64::new(0.0, 1.0);
            Ok(if bar {
                (dx + i * dy) * 0.5
            } else {
                (dx - i * dy) * 0.5
            })
        }
    }
}

/// Rounding floor of the composed central-difference stencil: the stencil is
/// a signed sum of roughly 4^order evaluations divided by (4h)^order, so its
/// subtractive rounding noise scales like eps * |f| / h^order. Discrepancies
/// at or below this level mean the oracle agrees to machine precision and
/// carry no convergence information.
pub fn fd_noise_floor(order: usize, h: f64, field_scale: f64) -> f64 {
    32.0 * f64::EPSILON * field_scale.max(1.0) / h.powi(order as i32)
}

/// Result of a symbolic-versus-numeric derivative comparison.
#[derive(Debug, Clone, Copy)]
pub struct FdCheck {
    pub symbolic: Complex64,
    pub numeric: Complex64,
    pub discrepancy: f64,
}

/// Compare the exact symbolic derivative of `f` along `idx` against the
/// central-difference oracle with step `h`.
pub fn fd_check(
    f: &ScalarField,
    idx: &WirtingerIndex,
    q: ComplexPoint2,
    h: f64,
) -> Result<FdCheck, EvalError> {
    debug_assert!(
        idx.order() <= 3,
        "the oracle drowns in rounding beyond third order"
    );
    debug_assert!(
        (1e-6..=1e-2).contains(&h),
        "step {h} outside the supported range"
    );
    let sym_field = wirtinger(f, idx);
    let symbolic = Evaluator::new(q).eval(&sym_field)?;
    let numeric = fd_wirtinger(f, &idx.0, q, h)?;
    Ok(FdCheck {
        symbolic,
        numeric,
        discrepancy: (symbolic - numeric).norm(),
    })
}
