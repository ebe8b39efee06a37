//! Locating the weakly pseudoconvex part of the boundary.
//!
//! The weak set is the zero set of H_rho(L,L) on the boundary, which has
//! measure zero, so raw boundary samples essentially never classify as weak
//! under a tight threshold. Starting from the samples with the smallest
//! tangential Levi eigenvalue, a projected descent slides along the boundary
//! into the zero set; points that land below the weak threshold become weak
//! anchors. Around each anchor a denser local resample repeats the descent,
//! so a one-dimensional weak set contributes several samples and the largest
//! obstruction over the visible weak set is estimated from more than one
//! point.

use super::sampling::LowDiscrepancy4;
use crate::expr::{differentiate, Program, ScalarField, WirtingerOp};
use crate::geometry::{classify, BoundaryPoint, Projector};
use crate::types::{Box4, Classification, ComplexPoint2, ComplexVector2};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct WeakRefineConfig {
    pub tau_weak: f64,
    pub boundary_tol: f64,
    /// Candidate cut: samples with levi_ll below this times the Hessian
    /// scale start a descent.
    pub candidate_cut: f64,
    pub max_candidates: usize,
    pub descent_steps: usize,
    /// Local resamples per detected anchor.
    pub densify_count: usize,
    /// Radius of the local resample cube as a fraction of the box diameter.
    pub densify_radius_frac: f64,
    pub projection_max_iter: usize,
}

impl Default for WeakRefineConfig {
    fn default() -> Self {
        WeakRefineConfig {
            tau_weak: 1e-8,
            boundary_tol: 1e-10,
            candidate_cut: 0.05,
            max_candidates: 24,
            descent_steps: 90,
            densify_count: 12,
            densify_radius_frac: 0.02,
            projection_max_iter: 200,
        }
    }
}

struct DescentFields {
    /// tape evaluating (levi_ll, 2*d levi_ll/dz1bar, 2*d levi_ll/dz2bar,
    /// rho_z1, rho_z2, rho)
    program: Program,
}

impl DescentFields {
    fn new(projector: &Projector) -> Self {
        let geom = projector.geometry();
        let h = geom.levi_ll_field();
        let two = crate::expr::konst_re(2.0);
        let g1: ScalarField = crate::expr::mul(&two, &differentiate(h, WirtingerOp::Z1Bar));
        let g2: ScalarField = crate::expr::mul(&two, &differentiate(h, WirtingerOp::Z2Bar));
        let program =
            Program::compile(&[h, &g1, &g2, &geom.rho_z()[0], &geom.rho_z()[1], geom.rho()]);
        DescentFields { program }
    }

    /// H(L,L) at the point, both raw and corrected back to the boundary to
    /// first order in the projection residual.
    ///
    /// Iterates carry a residual of up to the boundary tolerance; a descent
    /// on the raw value can ratchet off the zero set of rho, trading normal
    /// offset against the ambient value instead of moving towards the weak
    /// set, so acceptance decisions use the corrected value. The raw value
    /// is jitter-free and drives the final undamped polish.
    fn probe(&self, q: ComplexPoint2) -> Option<ProbeData> {
        let out = self.program.eval_at(q).ok()?;
        let h_raw = out[0].re;
        let grad = ComplexVector2([out[1], out[2]]);
        let gn = (out[3].norm_sqr() + out[4].norm_sqr()).sqrt();
        if gn < crate::geometry::GRADIENT_FLOOR {
            return None;
        }
        let normal = ComplexVector2([out[3].conj() / gn, out[4].conj() / gn]);
        let offset = out[5].re / (2.0 * gn);
        let dh_dn = normal.dot(&grad).re;
        Some(ProbeData {
            h_raw,
            h: h_raw - dh_dn * offset,
            grad,
            normal,
        })
    }
}

struct ProbeData {
    h_raw: f64,
    /// first-order boundary-corrected value
    h: f64,
    grad: ComplexVector2,
    normal: ComplexVector2,
}

/// Remove the real normal component: the boundary tangent space at p is
/// the real-orthogonal complement of the unit normal.
fn tangential(grad: &ComplexVector2, normal: &ComplexVector2) -> ComplexVector2 {
    let along = grad.dot(normal).re;
    ComplexVector2([
        grad.0[0] - along * normal.0[0],
        grad.0[1] - along * normal.0[1],
    ])
}

fn project_tight(
    projector: &Projector,
    cand: ComplexPoint2,
    cfg: &WeakRefineConfig,
) -> Option<ComplexPoint2> {
    // as tight as the arithmetic allows, falling back to a still-tight
    // tolerance when the last Newton digit refuses to settle
    let tol_tight = cfg.boundary_tol.min(1e-15);
    let tol_loose = cfg.boundary_tol.min(1e-12);
    let p = projector
        .project(cand, tol_tight, cfg.projection_max_iter)
        .or_else(|_| projector.project(cand, tol_loose, cfg.projection_max_iter))
        .ok()
        .map(|(p, _)| p)?;
    // one explicit Newton correction along the normal usually lands a few
    // digits below the projector's acceptance tolerance
    let geom = projector.geometry();
    if let (Ok(rho_p), Ok((n, gn))) = (geom.rho_at(p), geom.unit_normal_at(p)) {
        let extra = crate::geometry::step_point(p, &n, -rho_p / (2.0 * gn));
        if let Ok(rho_e) = geom.rho_at(extra) {
            if rho_e.abs() < rho_p.abs() {
                return Some(extra);
            }
        }
    }
    Some(p)
}

/// Damped descent on the boundary-corrected value of H(L,L).
///
/// The correction makes drifting off the boundary worthless, which matters
/// when the weak set is a single point; its projection-residual jitter
/// limits how deep the damped phase can go.
fn damped_phase(
    projector: &Projector,
    fields: &DescentFields,
    start: ComplexPoint2,
    max_step: f64,
    cfg: &WeakRefineConfig,
) -> Option<ComplexPoint2> {
    let mut p = start;
    let mut budget = cfg.descent_steps;
    while budget > 0 {
        budget -= 1;
        let data = fields.probe(p)?;
        let scale = levi_scale(projector, p)?;
        if data.h <= 1e-18 * scale {
            break;
        }
        let g_t = tangential(&data.grad, &data.normal);
        let g_norm_sq = g_t.norm_sqr();
        if g_norm_sq < 1e-28 {
            break;
        }
        let mut t = (data.h / g_norm_sq).min(max_step / g_norm_sq.sqrt());
        let mut improved = false;
        for _ in 0..14 {
            let cand = crate::geometry::step_point(p, &g_t, -t);
            let Some(proj) = project_tight(projector, cand, cfg) else {
                t *= 0.5;
                continue;
            };
            match fields.probe(proj) {
                Some(next) if next.h < data.h || next.h <= 0.0 => {
                    p = proj;
                    improved = true;
                    break;
                }
                _ => t *= 0.5,
            }
        }
        if !improved {
            break;
        }
    }
    Some(p)
}

/// Undamped transverse Newton polish on the raw value of H(L,L).
///
/// Near the zero set the tangential step `t = H / |g_t|^2` halves the
/// transverse distance per iteration; the raw value is free of the
/// correction jitter, so a weak curve polishes several orders deeper than
/// the damped phase. No acceptance decisions are made, which also means the
/// off-boundary ratchet has nothing to exploit beyond one projection
/// residual.
fn newton_polish(
    projector: &Projector,
    fields: &DescentFields,
    start: ComplexPoint2,
    cfg: &WeakRefineConfig,
) -> Option<ComplexPoint2> {
    let mut p = start;
    for _ in 0..30 {
        let data = fields.probe(p)?;
        if data.h_raw <= 0.0 {
            break;
        }
        let g_t = tangential(&data.grad, &data.normal);
        let g_norm_sq = g_t.norm_sqr();
        if g_norm_sq < 1e-28 {
            break;
        }
        let t = data.h_raw / g_norm_sq;
        let cand = crate::geometry::step_point(p, &g_t, -t);
        let Some(proj) = project_tight(projector, cand, cfg) else {
            break;
        };
        p = proj;
    }
    Some(p)
}

/// How badly a candidate weak point violates the identities that hold on
/// the exact weak set: the mixed Levi term and the imaginary part of the
/// obstruction both vanish there.
fn weak_certificate_defect(projector: &Projector, p: ComplexPoint2) -> f64 {
    let geom = projector.geometry();
    let nl = geom
        .levi_nl_at(p)
        .map(|v| v.norm())
        .unwrap_or(f64::INFINITY);
    let a_im = crate::expr::eval(geom.obstruction_field(), p)
        .map(|v| v.im.abs())
        .unwrap_or(f64::INFINITY);
    nl.max(a_im)
}

/// Slide one boundary point along the boundary towards the zero set of
/// H_rho(L,L). Returns the final point when it classifies weak.
fn descend_to_weak(
    projector: &Projector,
    fields: &DescentFields,
    start: ComplexPoint2,
    bbox: &Box4,
    cfg: &WeakRefineConfig,
) -> Option<ComplexPoint2> {
    let max_step = 0.25 * bbox.diameter();
    let damped = damped_phase(projector, fields, start, max_step, cfg)?;
    let polished = newton_polish(projector, fields, damped, cfg)?;
    // a weak curve favors the polish, an isolated weak point the damped
    // endpoint; judge by the identities that certify weakness
    let p = if weak_certificate_defect(projector, polished)
        <= weak_certificate_defect(projector, damped)
    {
        polished
    } else {
        damped
    };
    match classify(projector.geometry(), p, cfg.tau_weak, cfg.boundary_tol) {
        Ok(Classification::Weak) => Some(p),
        _ => None,
    }
}

fn levi_scale(projector: &Projector, p: ComplexPoint2) -> Option<f64> {
    projector
        .geometry()
        .levi_at(p)
        .ok()
        .map(|h| h.tolerance_scale())
}

/// Find weak boundary points reachable from the given samples.
///
/// Returns refined weak points (deduplicated) with their obstruction values.
pub fn refine_weak_points(
    projector: &Projector,
    samples: &[BoundaryPoint],
    bbox: &Box4,
    cfg: &WeakRefineConfig,
    seed: u64,
) -> Vec<BoundaryPoint> {
    if samples.is_empty() {
        return Vec::new();
    }
    let fields = DescentFields::new(projector);
    // most promising starts first
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| samples[i].levi_ll.partial_cmp(&samples[j].levi_ll).unwrap());

    let mut anchors: Vec<ComplexPoint2> = Vec::new();
    let dedupe_radius = 1e-7 * bbox.diameter().max(1e-12);
    let push_unique = |anchors: &mut Vec<ComplexPoint2>, p: ComplexPoint2| {
        if anchors.iter().all(|a| a.distance(&p) > dedupe_radius) {
            anchors.push(p);
            true
        } else {
            false
        }
    };

    for &i in order.iter().take(cfg.max_candidates) {
        let bp = &samples[i];
        let Some(scale) = levi_scale(projector, bp.point) else {
            continue;
        };
        if bp.levi_ll > cfg.candidate_cut * scale {
            break;
        }
        if let Some(p) = descend_to_weak(projector, &fields, bp.point, bbox, cfg) {
            push_unique(&mut anchors, p);
        }
    }

    // densify around each anchor so a curve of weak points contributes
    // more than one sample
    let mut seq = LowDiscrepancy4::new(seed ^ 0x717e_57e9);
    let radius = cfg.densify_radius_frac * bbox.diameter();
    let initial = anchors.clone();
    for anchor in initial {
        for _ in 0..cfg.densify_count {
            let u = seq.next_unit();
            let q = ComplexPoint2::from_re_im(
                anchor.z1.re + radius * (u[0] - 0.5),
                anchor.z1.im + radius * (u[1] - 0.5),
                anchor.z2.re + radius * (u[2] - 0.5),
                anchor.z2.im + radius * (u[3] - 0.5),
            );
            let Ok((p0, _)) = projector.project(q, cfg.boundary_tol, cfg.projection_max_iter)
            else {
                continue;
            };
            if !bbox.contains(&p0) {
                continue;
            }
            if let Some(p) = descend_to_weak(projector, &fields, p0, bbox, cfg) {
                if bbox.contains(&p) {
                    push_unique(&mut anchors, p);
                }
            }
        }
    }

    let geom = projector.geometry();
    anchors
        .into_iter()
        .filter_map(|p| {
            let grad = geom.gradient_at(p).ok()?;
            let levi_ll = geom.levi_ll_at(p).ok()?;
            let a = obstruction_real_checked(geom, p)?;
            Some(BoundaryPoint {
                point: p,
                grad,
                levi_ll,
                classification: Classification::Weak,
                obstruction: a,
            })
        })
        .collect()
}

fn obstruction_real_checked(
    geom: &crate::geometry::DomainGeometry,
    p: ComplexPoint2,
) -> Option<f64> {
    let v: Complex64 = crate::expr::eval(geom.obstruction_field(), p).ok()?;
    // the obstruction is real at weak points
    if v.im.abs() > 1e-8 * (1.0 + v.re.abs()) {
        return None;
    }
    Some(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::verify::sampling::sample_boundary;

    #[test]
    fn finds_the_weak_set_of_the_example_domain() {
        let rho = parse(
            "re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3",
        )
        .unwrap();
        let projector = Projector::new(&rho);
        let bbox = Box4::new([
            [-0.25, 0.25],
            [-0.25, 0.25],
            [-0.18, 0.02],
            [-0.0075, 0.0075],
        ]);
        let samples = sample_boundary(&projector, &bbox, 200, 5, 1e-10, 1e-8, 200).unwrap();
        let weak = refine_weak_points(&projector, &samples, &bbox, &WeakRefineConfig::default(), 5);
        assert!(!weak.is_empty(), "no weak points detected");
        let a_max = weak.iter().map(|w| w.obstruction).fold(f64::MIN, f64::max);
        assert!((a_max - 0.5).abs() < 1e-6, "largest obstruction {a_max}");
        for w in &weak {
            // weak set of this domain is on the z1 = 0 slice
            assert!(
                w.point.z1.norm() < 1e-4,
                "weak point off the slice: {}",
                w.point
            );
        }
    }

    #[test]
    fn ball_has_no_weak_points() {
        let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
        let projector = Projector::new(&rho);
        let bbox = Box4::cube(1.2);
        let samples = sample_boundary(&projector, &bbox, 64, 9, 1e-10, 1e-8, 200).unwrap();
        let weak = refine_weak_points(&projector, &samples, &bbox, &WeakRefineConfig::default(), 9);
        assert!(weak.is_empty());
    }
}
