//! Boundary geometry derived from a defining function rho on C^2.
//!
//! The boundary is the zero set of rho with the domain on the side where
//! rho is negative. Away from critical points of rho the unit (1,0) frame
//!
//! ```text
//! L = (rho_z2 d/dz1 - rho_z1 d/dz2) / |d rho|
//! N = (rho_z1bar d/dz1 + rho_z2bar d/dz2) / |d rho|
//! ```
//!
//! spans the complex tangential and complex normal directions. All frame
//! combinations that involve an even number of frame factors are assembled
//! from the unnormalized components over `|d rho|^2`, so they stay free of
//! square roots; only odd combinations (a single directional derivative
//! along N or L) carry a `sqrt`.

mod analysis;
mod project;

pub use analysis::{
    classify, convergence_slope, lemma_weak_tangential_check, obstruction, obstruction_checked,
    taylor_normal_check, BoundaryPoint, FrameDecomposition, BOUNDARY_TOL_DEFAULT, TAU_WEAK_DEFAULT,
};
pub use project::{project_to_boundary, Projector};

use crate::expr::{
    abs2, add, conj, differentiate, div, mul, neg, sqrt, Evaluator, ScalarField, WirtingerOp,
};
use crate::types::{ComplexCovector2, ComplexPoint2, ComplexVector2, HermitianForm2};
use num_complex::Complex64;
use thiserror::Error;

/// Modulus floor under which the gradient counts as degenerate.
pub const GRADIENT_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("degenerate gradient |d rho| = {modulus:e} at {point}")]
    DegenerateGradient { point: ComplexPoint2, modulus: f64 },
    #[error("normal projection did not converge within {max_iter} iterations from {start}")]
    NoConvergence {
        start: ComplexPoint2,
        max_iter: usize,
    },
    #[error("point {point} is not on the boundary: |rho| = {rho:e} exceeds {tol:e}")]
    NotOnBoundary {
        point: ComplexPoint2,
        rho: f64,
        tol: f64,
    },
    #[error("vector field is not complex tangential at {point}: |X(rho)| = {residual:e}")]
    NotTangential { point: ComplexPoint2, residual: f64 },
    #[error("boundary point {point} is not weakly pseudoconvex (H(L,L) = {levi_ll:e})")]
    NotWeak { point: ComplexPoint2, levi_ll: f64 },
}

/// The unit complex tangential and complex normal (1,0) frame fields,
/// stored as pairs of symbolic components.
pub struct FrameFields {
    pub l: [ScalarField; 2],
    pub n: [ScalarField; 2],
    /// `|d rho|^2`, used to reject near-critical points before dividing.
    grad_norm_sq: ScalarField,
}

impl FrameFields {
    /// Evaluate both frame vectors at `q`; a near-critical point of the
    /// defining function is a degenerate-gradient error.
    pub fn at(&self, q: ComplexPoint2) -> Result<(ComplexVector2, ComplexVector2), GeometryError> {
        let mut ev = Evaluator::new(q);
        let gn = ev.eval(&self.grad_norm_sq)?.re;
        if gn < GRADIENT_FLOOR * GRADIENT_FLOOR {
            return Err(GeometryError::DegenerateGradient {
                point: q,
                modulus: gn.max(0.0).sqrt(),
            });
        }
        let l = ComplexVector2([ev.eval(&self.l[0])?, ev.eval(&self.l[1])?]);
        let n = ComplexVector2([ev.eval(&self.n[0])?, ev.eval(&self.n[1])?]);
        Ok((l, n))
    }
}

/// First Wirtinger derivatives `(df/dz1, df/dz2)` evaluated at `q`.
pub fn gradient(f: &ScalarField, q: ComplexPoint2) -> Result<ComplexCovector2, GeometryError> {
    let d1 = differentiate(f, WirtingerOp::Z1);
    let d2 = differentiate(f, WirtingerOp::Z2);
    let mut ev = Evaluator::new(q);
    Ok(ComplexCovector2([ev.eval(&d1)?, ev.eval(&d2)?]))
}

/// The frame fields of a defining function.
pub fn frame(rho: &ScalarField) -> FrameFields {
    DomainGeometry::new(rho.clone()).frame()
}

/// The Levi form of `f` at `q` as a 2x2 Hermitian form.
pub fn levi(f: &ScalarField, q: ComplexPoint2) -> Result<HermitianForm2, GeometryError> {
    Hessian::new(f).at(q)
}

/// Contraction `H_f(X, Y)(q) = sum_jk f_{z_j zbar_k} X_j conj(Y_k)` for
/// symbolic vector fields X and Y.
pub fn levi_pair(
    f: &ScalarField,
    x: &[ScalarField; 2],
    y: &[ScalarField; 2],
    q: ComplexPoint2,
) -> Result<Complex64, GeometryError> {
    let hess = Hessian::new(f);
    let mut ev = Evaluator::new(q);
    let xv = ComplexVector2([ev.eval(&x[0])?, ev.eval(&x[1])?]);
    let yv = ComplexVector2([ev.eval(&y[0])?, ev.eval(&y[1])?]);
    let entries = hess.entries_at(&mut ev)?;
    let mut acc = Complex64::new(0.0, 0.0);
    #[allow(clippy::needless_range_loop)]
    for j in 0..2 {
        for k in 0..2 {
            acc += entries[j][k] * xv.0[j] * yv.0[k].conj();
        }
    }
    Ok(acc)
}

/// Symbolic mixed second Wirtinger derivatives of a field.
pub struct Hessian {
    /// entries[j][k] = d^2 f / dz_{j+1} dzbar_{k+1}
    pub entries: [[ScalarField; 2]; 2],
}

impl Hessian {
    pub fn new(f: &ScalarField) -> Self {
        let dz = [
            differentiate(f, WirtingerOp::Z1),
            differentiate(f, WirtingerOp::Z2),
        ];
        let e = |j: usize, k: usize| {
            let bar = if k == 0 {
                WirtingerOp::Z1Bar
            } else {
                WirtingerOp::Z2Bar
            };
            differentiate(&dz[j], bar)
        };
        Hessian {
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
        }
    }

    pub fn entries_at(&self, ev: &mut Evaluator) -> Result<[[Complex64; 2]; 2], GeometryError> {
        Ok([
            [ev.eval(&self.entries[0][0])?, ev.eval(&self.entries[0][1])?],
            [ev.eval(&self.entries[1][0])?, ev.eval(&self.entries[1][1])?],
        ])
    }

    /// Evaluate and symmetrize into a Hermitian form. For real-valued fields
    /// the symmetrization is a no-op up to rounding.
    pub fn at(&self, q: ComplexPoint2) -> Result<HermitianForm2, GeometryError> {
        let mut ev = Evaluator::new(q);
        let h = self.entries_at(&mut ev)?;
        Ok(HermitianForm2 {
            h11: h[0][0].re,
            h12: 0.5 * (h[0][1] + h[1][0].conj()),
            h22: h[1][1].re,
        })
    }

    /// Largest deviation from Hermitian symmetry at `q`.
    pub fn hermitian_defect(&self, q: ComplexPoint2) -> Result<f64, GeometryError> {
        let mut ev = Evaluator::new(q);
        let h = self.entries_at(&mut ev)?;
        let d = (h[0][1] - h[1][0].conj()).norm();
        Ok(d.max(h[0][0].im.abs()).max(h[1][1].im.abs()))
    }
}

/// Cached symbolic geometry of one defining function.
///
/// Building the derived fields is cheap relative to the sampling loops that
/// consume them, but the verification engine touches them thousands of
/// times, so they are constructed once here.
pub struct DomainGeometry {
    rho: ScalarField,
    rho_z: [ScalarField; 2],
    rho_zbar: [ScalarField; 2],
    /// |d rho|^2, square-root free
    grad_norm_sq: ScalarField,
    hessian: Hessian,
    /// H_rho(L, L), square-root free
    levi_ll: ScalarField,
    /// H_rho(N, L), square-root free
    levi_nl: ScalarField,
    /// N applied to H_rho(L, L); carries one sqrt through N
    obstruction_field: ScalarField,
}

impl DomainGeometry {
    pub fn new(rho: ScalarField) -> Self {
        let rho_z = [
            differentiate(&rho, WirtingerOp::Z1),
            differentiate(&rho, WirtingerOp::Z2),
        ];
        let rho_zbar = [
            differentiate(&rho, WirtingerOp::Z1Bar),
            differentiate(&rho, WirtingerOp::Z2Bar),
        ];
        let grad_norm_sq = add(&abs2(&rho_z[0]), &abs2(&rho_z[1]));
        let hessian = Hessian::new(&rho);

        // unnormalized frame components
        let l_u = [rho_z[1].clone(), neg(&rho_z[0])];
        let n_u = rho_zbar.clone();

        let contract = |x: &[ScalarField; 2], y: &[ScalarField; 2]| {
            let mut acc = crate::expr::konst_re(0.0);
            #[allow(clippy::needless_range_loop)]
            for j in 0..2 {
                for k in 0..2 {
                    let term = mul(&hessian.entries[j][k], &mul(&x[j], &conj(&y[k])));
                    acc = add(&acc, &term);
                }
            }
            acc
        };

        let levi_ll = div(&contract(&l_u, &l_u), &grad_norm_sq);
        let levi_nl = div(&contract(&n_u, &l_u), &grad_norm_sq);

        // N f = sum_l rho_zbar_l (df/dz_l) / |d rho|
        let grad_norm = sqrt(&grad_norm_sq);
        let n_of_levi_ll = {
            let num = add(
                &mul(&rho_zbar[0], &differentiate(&levi_ll, WirtingerOp::Z1)),
                &mul(&rho_zbar[1], &differentiate(&levi_ll, WirtingerOp::Z2)),
            );
            div(&num, &grad_norm)
        };

        DomainGeometry {
            rho,
            rho_z,
            rho_zbar,
            grad_norm_sq,
            hessian,
            levi_ll,
            levi_nl,
            obstruction_field: n_of_levi_ll,
        }
    }

    pub fn rho(&self) -> &ScalarField {
        &self.rho
    }

    pub fn rho_z(&self) -> &[ScalarField; 2] {
        &self.rho_z
    }

    pub fn rho_zbar(&self) -> &[ScalarField; 2] {
        &self.rho_zbar
    }

    /// `|d rho|^2` as a square-root free field.
    pub fn grad_norm_sq_field(&self) -> &ScalarField {
        &self.grad_norm_sq
    }

    pub fn hessian(&self) -> &Hessian {
        &self.hessian
    }

    /// `H_rho(L, L)` as a symbolic field.
    pub fn levi_ll_field(&self) -> &ScalarField {
        &self.levi_ll
    }

    /// `H_rho(N, L)` as a symbolic field.
    pub fn levi_nl_field(&self) -> &ScalarField {
        &self.levi_nl
    }

    /// `N H_rho(L, L)` as a symbolic field.
    pub fn obstruction_field(&self) -> &ScalarField {
        &self.obstruction_field
    }

    /// The normalized frame fields (these carry a sqrt of `|d rho|^2`).
    pub fn frame(&self) -> FrameFields {
        let grad_norm = sqrt(&self.grad_norm_sq);
        FrameFields {
            l: [
                div(&self.rho_z[1], &grad_norm),
                div(&neg(&self.rho_z[0]), &grad_norm),
            ],
            n: [
                div(&self.rho_zbar[0], &grad_norm),
                div(&self.rho_zbar[1], &grad_norm),
            ],
            grad_norm_sq: self.grad_norm_sq.clone(),
        }
    }

    pub fn rho_at(&self, q: ComplexPoint2) -> Result<f64, GeometryError> {
        let v = Evaluator::new(q).eval(&self.rho)?;
        Ok(v.re)
    }

    /// Wirtinger gradient of rho at `q`.
    pub fn gradient_at(&self, q: ComplexPoint2) -> Result<ComplexCovector2, GeometryError> {
        let mut ev = Evaluator::new(q);
        Ok(ComplexCovector2([
            ev.eval(&self.rho_z[0])?,
            ev.eval(&self.rho_z[1])?,
        ]))
    }

    /// Unit outward normal at `q` in complex notation, together with
    /// `|d rho|(q)`. Rejects near-critical points.
    pub fn unit_normal_at(&self, q: ComplexPoint2) -> Result<(ComplexVector2, f64), GeometryError> {
        let g = self.gradient_at(q)?;
        let norm = g.norm();
        if norm < GRADIENT_FLOOR {
            return Err(GeometryError::DegenerateGradient {
                point: q,
                modulus: norm,
            });
        }
        let n = ComplexVector2([g.0[0].conj() / norm, g.0[1].conj() / norm]);
        Ok((n, norm))
    }

    pub fn levi_at(&self, q: ComplexPoint2) -> Result<HermitianForm2, GeometryError> {
        self.hessian.at(q)
    }

    /// `H_rho(L,L)(q)` evaluated through the square-root free field.
    pub fn levi_ll_at(&self, q: ComplexPoint2) -> Result<f64, GeometryError> {
        let v = Evaluator::new(q).eval(&self.levi_ll)?;
        Ok(v.re)
    }

    pub fn levi_nl_at(&self, q: ComplexPoint2) -> Result<Complex64, GeometryError> {
        Ok(Evaluator::new(q).eval(&self.levi_nl)?)
    }

    /// Decompose a vector against the frame at `q`: `xi = a L(q) + b N(q)`.
    pub fn decompose(
        &self,
        xi: &ComplexVector2,
        q: ComplexPoint2,
    ) -> Result<FrameDecomposition, GeometryError> {
        let (l, n) = self.frame().at(q)?;
        Ok(FrameDecomposition {
            a: xi.dot(&l),
            b: xi.dot(&n),
            l,
            n,
        })
    }
}

/// Apply a symbolic vector field `X = sum X_j d/dz_j` to a scalar field.
pub fn apply_vector_field(x: &[ScalarField; 2], f: &ScalarField) -> ScalarField {
    add(
        &mul(&x[0], &differentiate(f, WirtingerOp::Z1)),
        &mul(&x[1], &differentiate(f, WirtingerOp::Z2)),
    )
}

/// Difference of two points as a vector.
pub fn sub_points(a: ComplexPoint2, b: ComplexPoint2) -> ComplexVector2 {
    ComplexVector2([a.z1 - b.z1, a.z2 - b.z2])
}

/// `p + t v` for a complex direction vector.
pub fn step_point(p: ComplexPoint2, v: &ComplexVector2, t: f64) -> ComplexPoint2 {
    ComplexPoint2::new(p.z1 + t * v.0[0], p.z2 + t * v.0[1])
}
