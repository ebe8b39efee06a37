//! Invariant suite runnable against any configured domain.
//!
//! Each invariant is a named numeric check with an explicit tolerance; the
//! command-line `selftest` subcommand runs the suite over the built-in
//! domains and reports one line per invariant.

use crate::expr::{eval, wirtinger, ScalarField, WirtingerIndex, WirtingerOp};
use crate::geometry::{DomainGeometry, Projector};
use crate::transforms::{modified_defining_with_sigma, sigma_from_geometry};
use crate::types::{Box4, ComplexPoint2, ComplexVector2, Side};
use crate::verify::{
    check_main_estimate, check_psh_on_boundary, refine_weak_points, sample_boundary, sample_collar,
    LowDiscrepancy4, WeakRefineConfig,
};
use num_complex::Complex64;

#[derive(Debug, Clone, serde::Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn result(name: &str, pass: bool, detail: String) -> InvariantResult {
    InvariantResult {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn random_noncritical_points(
    geom: &DomainGeometry,
    bbox: &Box4,
    n: usize,
    seed: u64,
) -> Vec<ComplexPoint2> {
    let mut seq = LowDiscrepancy4::new(seed ^ 0xabcd);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 64 * n {
        attempts += 1;
        let q = seq.next_in_box(bbox);
        if let Ok(g) = geom.gradient_at(q) {
            if g.norm() > 1e-3 {
                out.push(q);
            }
        }
    }
    out
}

/// Run the full invariant suite for one domain.
pub fn run_suite(rho: &ScalarField, bbox: &Box4, seed: u64) -> Vec<InvariantResult> {
    let geom = DomainGeometry::new(rho.clone());
    let projector = Projector::new(rho);
    let mut results = Vec::new();
    let pts = random_noncritical_points(&geom, bbox, 200, seed);

    results.push(commutation_invariant(rho, &pts));
    results.push(conjugation_invariant(rho, &pts));
    results.push(hermitian_invariant(&geom, &pts));
    results.push(frame_invariants(&geom, &pts));
    results.push(tangency_invariant(&geom, rho, &pts));
    results.push(decomposition_invariant(&geom, &pts, seed));

    // boundary-dependent invariants
    let samples = match sample_boundary(&projector, bbox, 64, seed, 1e-10, 1e-8, 200) {
        Ok(s) => s,
        Err(e) => {
            results.push(result("boundary-sampling", false, e.to_string()));
            return results;
        }
    };
    results.push(projection_idempotence(&projector, &samples));
    results.push(boundary_psh(rho, &samples));
    results.push(cauchy_schwarz(&geom, &samples));

    let weak = refine_weak_points(
        &projector,
        &samples,
        bbox,
        &WeakRefineConfig::default(),
        seed,
    );
    results.push(weak_mixed_levi(&geom, &weak));
    results.push(weak_frame_identity(&geom, &weak));
    results.push(transform_zero_set(&geom, bbox, seed));
    results.push(main_estimate_reduction(&projector, bbox, &samples, seed));
    results
}

fn commutation_invariant(rho: &ScalarField, pts: &[ComplexPoint2]) -> InvariantResult {
    let a = WirtingerIndex::new(vec![
        WirtingerOp::Z1,
        WirtingerOp::Z2Bar,
        WirtingerOp::Z1Bar,
    ]);
    let b = WirtingerIndex::new(vec![
        WirtingerOp::Z1Bar,
        WirtingerOp::Z1,
        WirtingerOp::Z2Bar,
    ]);
    let fa = wirtinger(rho, &a);
    let fb = wirtinger(rho, &b);
    let mut worst: f64 = 0.0;
    for &q in pts.iter().take(100) {
        let (Ok(va), Ok(vb)) = (eval(&fa, q), eval(&fb, q)) else {
            continue;
        };
        worst = worst.max((va - vb).norm() / (1.0 + va.norm()));
    }
    result(
        "wirtinger-commutation",
        worst <= 1e-12,
        format!("max relative gap {worst:.3e}"),
    )
}

fn conjugation_invariant(rho: &ScalarField, pts: &[ComplexPoint2]) -> InvariantResult {
    let dz = wirtinger(rho, &WirtingerIndex::new(vec![WirtingerOp::Z1]));
    let dzbar = wirtinger(rho, &WirtingerIndex::new(vec![WirtingerOp::Z1Bar]));
    let mut worst: f64 = 0.0;
    for &q in pts.iter().take(100) {
        let (Ok(a), Ok(b)) = (eval(&dz, q), eval(&dzbar, q)) else {
            continue;
        };
        worst = worst.max((a - b.conj()).norm() / (1.0 + a.norm()));
    }
    result(
        "conjugation-symmetry",
        worst <= 1e-12,
        format!("max gap {worst:.3e}"),
    )
}

fn hermitian_invariant(geom: &DomainGeometry, pts: &[ComplexPoint2]) -> InvariantResult {
    let mut worst: f64 = 0.0;
    for &q in pts.iter().take(100) {
        if let Ok(d) = geom.hessian().hermitian_defect(q) {
            let scale = geom.levi_at(q).map(|h| h.tolerance_scale()).unwrap_or(1.0);
            worst = worst.max(d / scale);
        }
    }
    result(
        "hermitian-hessian",
        worst <= 1e-12,
        format!("max scaled defect {worst:.3e}"),
    )
}

fn frame_invariants(geom: &DomainGeometry, pts: &[ComplexPoint2]) -> InvariantResult {
    let fr = geom.frame();
    let mut worst: f64 = 0.0;
    for &q in pts {
        let Ok((l, n)) = fr.at(q) else { continue };
        worst = worst
            .max(l.dot(&n).norm())
            .max((l.norm() - 1.0).abs())
            .max((n.norm() - 1.0).abs());
    }
    result(
        "frame-orthonormality",
        worst <= 1e-10,
        format!("max defect {worst:.3e}"),
    )
}

fn tangency_invariant(
    geom: &DomainGeometry,
    rho: &ScalarField,
    pts: &[ComplexPoint2],
) -> InvariantResult {
    let fr = geom.frame();
    let l_rho = crate::geometry::apply_vector_field(&fr.l, rho);
    let mut worst: f64 = 0.0;
    for &q in pts {
        if let Ok(v) = eval(&l_rho, q) {
            worst = worst.max(v.norm());
        }
    }
    result(
        "frame-tangency",
        worst <= 1e-10,
        format!("max |L(rho)| {worst:.3e}"),
    )
}

fn decomposition_invariant(
    geom: &DomainGeometry,
    pts: &[ComplexPoint2],
    seed: u64,
) -> InvariantResult {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 0xdec0);
    let mut worst: f64 = 0.0;
    for &q in pts.iter().take(100) {
        let xi = ComplexVector2([
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
        ]);
        let Ok(dec) = geom.decompose(&xi, q) else {
            continue;
        };
        let rec = dec.reconstruct();
        let norm_gap =
            (xi.norm_sqr() - (dec.a.norm_sqr() + dec.b.norm_sqr())).abs() / (1.0 + xi.norm_sqr());
        worst = worst.max(rec.sub(&xi).norm()).max(norm_gap);
    }
    result(
        "frame-decomposition",
        worst <= 1e-10,
        format!("max defect {worst:.3e}"),
    )
}

fn projection_idempotence(
    projector: &Projector,
    samples: &[crate::geometry::BoundaryPoint],
) -> InvariantResult {
    let mut worst: f64 = 0.0;
    for bp in samples {
        if let Ok((p2, _)) = projector.project(bp.point, 1e-10, 200) {
            worst = worst.max(p2.distance(&bp.point));
        }
    }
    result(
        "projection-idempotence",
        worst <= 1e-10,
        format!("max movement {worst:.3e}"),
    )
}

fn boundary_psh(rho: &ScalarField, samples: &[crate::geometry::BoundaryPoint]) -> InvariantResult {
    match check_psh_on_boundary(rho, samples, 1e-10) {
        Ok(rep) => result(
            "boundary-psh",
            rep.pass,
            format!(
                "min Levi eigenvalue {:.3e} over {} points",
                rep.min_margin, rep.n_samples
            ),
        ),
        Err(e) => result("boundary-psh", false, e.to_string()),
    }
}

fn cauchy_schwarz(
    geom: &DomainGeometry,
    samples: &[crate::geometry::BoundaryPoint],
) -> InvariantResult {
    let fr = geom.frame();
    let mut worst: f64 = f64::NEG_INFINITY;
    for bp in samples {
        let (Ok(nl), Ok(ll), Ok(h)) = (
            geom.levi_nl_at(bp.point),
            geom.levi_ll_at(bp.point),
            geom.levi_at(bp.point),
        ) else {
            continue;
        };
        let Ok((_, n)) = fr.at(bp.point) else {
            continue;
        };
        let nn = h.apply(&n);
        worst = worst.max(nl.norm_sqr() - ll.max(0.0) * nn.max(0.0));
    }
    result(
        "cauchy-schwarz-mixed-levi",
        worst <= 1e-10,
        format!("max |H(L,N)|^2 - H(L,L) H(N,N) = {worst:.3e}"),
    )
}

fn weak_mixed_levi(
    geom: &DomainGeometry,
    weak: &[crate::geometry::BoundaryPoint],
) -> InvariantResult {
    if weak.is_empty() {
        return result("weak-mixed-levi", true, "no weak points".to_string());
    }
    let mut worst: f64 = 0.0;
    for bp in weak {
        let (Ok(nl), Ok(h)) = (geom.levi_nl_at(bp.point), geom.levi_at(bp.point)) else {
            continue;
        };
        worst = worst.max(nl.norm() / h.tolerance_scale());
    }
    result(
        "weak-mixed-levi",
        worst <= 1e-8,
        format!("max scaled |H(L,N)| {worst:.3e}"),
    )
}

fn weak_frame_identity(
    geom: &DomainGeometry,
    weak: &[crate::geometry::BoundaryPoint],
) -> InvariantResult {
    if weak.is_empty() {
        return result("weak-frame-identity", true, "no weak points".to_string());
    }
    let fr = geom.frame();
    let lh = crate::geometry::apply_vector_field(&fr.l, geom.levi_nl_field());
    let mut worst: f64 = 0.0;
    for bp in weak {
        let (Ok(lhs), Ok(h)) = (eval(&lh, bp.point), geom.levi_at(bp.point)) else {
            continue;
        };
        worst = worst.max((lhs - Complex64::new(bp.obstruction, 0.0)).norm() / h.tolerance_scale());
    }
    result(
        "weak-frame-identity",
        worst <= 1e-8,
        format!("max scaled |<dH(N,L),L> - N H(L,L)| {worst:.3e}"),
    )
}

fn transform_zero_set(geom: &DomainGeometry, bbox: &Box4, seed: u64) -> InvariantResult {
    let sigma = sigma_from_geometry(geom);
    let r = modified_defining_with_sigma(geom.rho(), &sigma, 2.0, Side::Interior);
    let mut seq = LowDiscrepancy4::new(seed ^ 0x2e20);
    let mut ok = true;
    let mut detail = String::from("sign preserved at 200 points");
    for _ in 0..200 {
        let q = seq.next_in_box(bbox);
        let (Ok(rho_v), Ok(r_v)) = (eval(geom.rho(), q), eval(&r, q)) else {
            continue;
        };
        if rho_v.re.abs() > 1e-12 && rho_v.re.signum() != r_v.re.signum() {
            ok = false;
            detail = format!("sign flipped at {q}");
            break;
        }
    }
    result("transform-zero-set", ok, detail)
}

fn main_estimate_reduction(
    projector: &Projector,
    bbox: &Box4,
    samples: &[crate::geometry::BoundaryPoint],
    _seed: u64,
) -> InvariantResult {
    // with eps = K = 0 the collar margin is exactly the smallest Levi
    // eigenvalue of the field
    let depths = vec![0.01 * bbox.diameter()];
    let take = samples.len().min(16);
    let collar = match sample_collar(
        projector,
        &samples[..take],
        &depths,
        Side::Interior,
        bbox,
        1e-10,
        200,
    ) {
        Ok(c) => c,
        Err(e) => return result("main-estimate-reduction", false, e.to_string()),
    };
    let rho = projector.geometry().rho().clone();
    let rep = match check_main_estimate(&rho, 0.0, 0.0, &collar, Side::Interior, 1e-9) {
        Ok(r) => r,
        Err(e) => return result("main-estimate-reduction", false, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    for (cs, margin) in collar.iter().zip(rep.margins.iter()) {
        match projector.geometry().levi_at(cs.q) {
            Ok(h) => worst = worst.max((h.min_eigenvalue() - margin).abs()),
            Err(e) => return result("main-estimate-reduction", false, e.to_string()),
        }
    }
    result(
        "main-estimate-reduction",
        worst <= 1e-12,
        format!("max margin gap {worst:.3e}"),
    )
}

/// True when every invariant passed.
pub fn all_pass(results: &[InvariantResult]) -> bool {
    results.iter().all(|r| r.pass)
}
