//! Closest-point projection onto the boundary.
//!
//! The projection solves a 1-D root problem along a normal line and refreshes
//! the line direction at the landing point until the foot point stabilizes:
//! at the fixed point, q - p is parallel to the real normal at p, which is
//! the closest-point condition on a collar narrower than the reach.
//!
//! The 1-D solve is a damped Newton iteration on `t -> rho(x - t n)`, falling
//! back to bisection once a sign change brackets the root.

use super::{step_point, sub_points, DomainGeometry, GeometryError};
use crate::expr::{Program, ScalarField};
use crate::types::{ComplexPoint2, ComplexVector2};
use num_complex::Complex64;

/// Internal angular target for the alignment of q - p with the normal at p.
/// The public contract is 1e-6; the iteration aims three orders tighter so
/// downstream consumers (collar reprojection at 1e-6 times the depth) see a
/// converged foot point, not one at the contract edge.
const ALIGN_TOL: f64 = 1e-9;

/// Reusable projection context for one defining function.
pub struct Projector {
    geom: DomainGeometry,
    /// tape evaluating (rho, rho_z1, rho_z2) in one pass
    program: Program,
}

struct Probe {
    rho: f64,
    grad: [Complex64; 2],
}

impl Projector {
    pub fn new(rho: &ScalarField) -> Self {
        let geom = DomainGeometry::new(rho.clone());
        let program = Program::compile(&[geom.rho(), &geom.rho_z()[0], &geom.rho_z()[1]]);
        Projector { geom, program }
    }

    pub fn from_geometry(geom: &DomainGeometry) -> Self {
        let geom = DomainGeometry::new(geom.rho().clone());
        let program = Program::compile(&[geom.rho(), &geom.rho_z()[0], &geom.rho_z()[1]]);
        Projector { geom, program }
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geom
    }

    fn probe(&self, q: ComplexPoint2) -> Result<Probe, GeometryError> {
        let mut scratch = Vec::new();
        let mut out = Vec::new();
        self.program.run(q, &mut scratch, &mut out)?;
        Ok(Probe {
            rho: out[0].re,
            grad: [out[1], out[2]],
        })
    }

    fn unit_normal(
        &self,
        probe: &Probe,
        at: ComplexPoint2,
    ) -> Result<ComplexVector2, GeometryError> {
        let norm = (probe.grad[0].norm_sqr() + probe.grad[1].norm_sqr()).sqrt();
        if norm < super::GRADIENT_FLOOR {
            return Err(GeometryError::DegenerateGradient {
                point: at,
                modulus: norm,
            });
        }
        Ok(ComplexVector2([
            probe.grad[0].conj() / norm,
            probe.grad[1].conj() / norm,
        ]))
    }

    /// Root of `s -> rho(base - s n)` near s = 0. Newton with step damping;
    /// once a sign change is bracketed, bisection guarantees progress.
    fn solve_along_line(
        &self,
        base: ComplexPoint2,
        n: &ComplexVector2,
        tol: f64,
        budget: &mut usize,
    ) -> Result<ComplexPoint2, GeometryError> {
        let eval_at = |s: f64| -> Result<(f64, Probe), GeometryError> {
            let x = step_point(base, n, -s);
            let p = self.probe(x)?;
            Ok((p.rho, p))
        };
        let mut s = 0.0;
        let (mut f, mut probe) = eval_at(0.0)?;
        // bracket endpoints with opposite signs, once known
        let mut bracket: Option<(f64, f64, f64, f64)> = None;
        while *budget > 0 {
            *budget -= 1;
            if f.abs() <= tol {
                return Ok(step_point(base, n, -s));
            }
            // d/ds rho(base - s n) = -2 Re <grad(x), conj basis...> = -2 Re sum rho_z_j n_j
            let deriv = -2.0 * (probe.grad[0] * n.0[0] + probe.grad[1] * n.0[1]).re;
            let mut step = if deriv.abs() > 1e-14 {
                -f / deriv
            } else {
                f.signum() * 1e-3
            };
            // keep Newton inside the bracket when one exists
            if let Some((sa, _fa, sb, _fb)) = bracket {
                let target = s + step;
                if target <= sa.min(sb) || target >= sa.max(sb) {
                    step = 0.5 * (sa + sb) - s;
                }
            }
            let mut accepted = false;
            for _ in 0..40 {
                let cand = s + step;
                let (fc, pc) = eval_at(cand)?;
                if fc.abs() < f.abs() || fc.abs() <= tol {
                    if fc.signum() != f.signum() && fc != 0.0 {
                        bracket = Some((s, f, cand, fc));
                    } else if let Some((sa, fa, _, _)) = bracket {
                        if fc.signum() != fa.signum() {
                            bracket = Some((sa, fa, cand, fc));
                        }
                    }
                    s = cand;
                    f = fc;
                    probe = pc;
                    accepted = true;
                    break;
                }
                if fc.signum() != f.signum() && fc != 0.0 {
                    bracket = Some((s, f, cand, fc));
                }
                step *= 0.5;
            }
            if !accepted {
                if let Some((sa, fa, sb, fb)) = bracket {
                    // plain bisection
                    let mid = 0.5 * (sa + sb);
                    let (fm, pm) = eval_at(mid)?;
                    if fm.abs() <= tol {
                        return Ok(step_point(base, n, -mid));
                    }
                    if fm.signum() == fa.signum() {
                        bracket = Some((mid, fm, sb, fb));
                    } else {
                        bracket = Some((sa, fa, mid, fm));
                    }
                    s = mid;
                    f = fm;
                    probe = pm;
                } else {
                    break;
                }
            }
        }
        Err(GeometryError::NoConvergence {
            start: base,
            max_iter: 0,
        })
    }

    /// Project `q` to the boundary. Returns the foot point and the signed
    /// distance (negative inside the domain).
    pub fn project(
        &self,
        q: ComplexPoint2,
        tol: f64,
        max_iter: usize,
    ) -> Result<(ComplexPoint2, f64), GeometryError> {
        let probe_q = self.probe(q)?;
        let rho_q = probe_q.rho;
        if rho_q.abs() <= tol {
            return Ok((q, 0.0));
        }
        let mut budget = max_iter.max(8);
        // phase 1: line through q along the normal frozen at q
        let n0 = self.unit_normal(&probe_q, q)?;
        let mut p = self.solve_along_line(q, &n0, tol, &mut budget)?;
        // phase 2: refresh the direction at the landing point
        loop {
            let probe_p = self.probe(p)?;
            let n = self.unit_normal(&probe_p, p)?;
            let r = sub_points(q, p);
            let dist = r.norm();
            if dist <= tol {
                return Ok((p, 0.0));
            }
            // tangential misalignment of q - p against the normal at p
            let along = r.dot(&n).re;
            let tangential =
                ComplexVector2([r.0[0] - along * n.0[0], r.0[1] - along * n.0[1]]).norm();
            if probe_p.rho.abs() <= tol && tangential <= ALIGN_TOL * dist {
                let d = dist.copysign(rho_q);
                return Ok((p, d));
            }
            if budget == 0 {
                return Err(GeometryError::NoConvergence { start: q, max_iter });
            }
            p = self
                .solve_along_line(q, &n, tol, &mut budget)
                .map_err(|e| match e {
                    GeometryError::NoConvergence { .. } => {
                        GeometryError::NoConvergence { start: q, max_iter }
                    }
                    other => other,
                })?;
        }
    }
}

/// One-shot projection. For loops, build a [`Projector`] once instead.
pub fn project_to_boundary(
    rho: &ScalarField,
    q: ComplexPoint2,
    tol: f64,
    max_iter: usize,
) -> Result<(ComplexPoint2, f64), GeometryError> {
    Projector::new(rho).project(q, tol, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn ball_projects_radially() {
        let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let q = ComplexPoint2::from_re_im(0.0, 0.0, 0.5, 0.0);
        let (p, d) = project_to_boundary(&rho, q, 1e-10, 100).unwrap();
        assert!((p.z2 - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(p.z1.norm() < 1e-9);
        assert!((d + 0.5).abs() < 1e-9);
    }

    #[test]
    fn boundary_point_is_fixed() {
        let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let q = ComplexPoint2::from_re_im(1.0, 0.0, 0.0, 0.0);
        let (p, d) = project_to_boundary(&rho, q, 1e-10, 100).unwrap();
        assert_eq!(p, q);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn example_normal_line_hits_origin() {
        let rho = parse(
            "re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3",
        )
        .unwrap();
        let q = ComplexPoint2::from_re_im(0.0, 0.0, -0.01, 0.0);
        let (p, d) = project_to_boundary(&rho, q, 1e-10, 200).unwrap();
        assert!(p.norm() < 1e-8, "expected origin, got {p}");
        assert!(d < 0.0);
        assert!((0.0099..=0.0101).contains(&d.abs()), "distance {d}");
    }

    #[test]
    fn degenerate_gradient_is_an_error() {
        // rho with a critical point at the evaluation point
        let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let q = ComplexPoint2::from_re_im(0.0, 0.0, 0.0, 0.0);
        match project_to_boundary(&rho, q, 1e-10, 50) {
            Err(GeometryError::DegenerateGradient { .. }) => {}
            other => panic!("expected degenerate gradient, got {other:?}"),
        }
    }
}
