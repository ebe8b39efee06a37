//! Deterministic sampling: a generalized golden-ratio low-discrepancy
//! sequence seeds candidate points, projection carries them to the boundary,
//! and collars grow along exact normal lines.

use crate::geometry::{classify, obstruction_checked, BoundaryPoint, GeometryError, Projector};
use crate::transforms::CollarSample;
use crate::types::{Box4, ComplexPoint2, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("only {got} of {requested} boundary samples converged after {attempts} attempts")]
    Undersampled {
        requested: usize,
        got: usize,
        attempts: usize,
    },
    #[error("collar reprojection moved {mismatch:e} away from the foot point at depth {depth:e}")]
    CollarReprojection { depth: f64, mismatch: f64 },
    #[error("collar depth {depth:e} exceeds the collar half-width {half_width:e}")]
    DepthOutsideCollar { depth: f64, half_width: f64 },
    #[error("region sampling produced no points (band {lo:e}..{hi:e})")]
    EmptyRegion { lo: f64, hi: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Generalized golden-ratio sequence in the unit 4-cube with a seeded
/// Cranley-Patterson rotation. Identical seeds give identical streams.
pub struct LowDiscrepancy4 {
    alphas: [f64; 4],
    offset: [f64; 4],
    index: u64,
}

impl LowDiscrepancy4 {
    pub fn new(seed: u64) -> Self {
        // unique positive root of x^5 = x + 1
        let mut phi = 1.2f64;
        for _ in 0..64 {
            phi -= (phi.powi(5) - phi - 1.0) / (5.0 * phi.powi(4) - 1.0);
        }
        let mut alphas = [0.0; 4];
        let mut a = 1.0;
        for slot in alphas.iter_mut() {
            a /= phi;
            *slot = a;
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut offset = [0.0; 4];
        for slot in offset.iter_mut() {
            *slot = rng.gen::<f64>();
        }
        LowDiscrepancy4 {
            alphas,
            offset,
            index: 0,
        }
    }

    pub fn next_unit(&mut self) -> [f64; 4] {
        self.index += 1;
        let n = self.index as f64;
        let mut u = [0.0; 4];
        for (slot, (off, alpha)) in u.iter_mut().zip(self.offset.iter().zip(self.alphas.iter())) {
            *slot = (off + n * alpha).fract();
        }
        u
    }

    pub fn next_in_box(&mut self, bbox: &Box4) -> ComplexPoint2 {
        bbox.point_at(self.next_unit())
    }
}

/// Draw `n` boundary points by low-discrepancy seeding in `bbox` followed by
/// projection. A candidate counts only if the projection converges, the foot
/// point stays inside the box, and |rho| meets the boundary tolerance.
pub fn sample_boundary(
    projector: &Projector,
    bbox: &Box4,
    n: usize,
    seed: u64,
    boundary_tol: f64,
    tau_weak: f64,
    max_iter: usize,
) -> Result<Vec<BoundaryPoint>, SamplingError> {
    let mut seq = LowDiscrepancy4::new(seed);
    let mut out = Vec::with_capacity(n);
    let max_attempts = 64 * n.max(1);
    let mut attempts = 0;
    while out.len() < n && attempts < max_attempts {
        attempts += 1;
        let q = seq.next_in_box(bbox);
        let Ok((p, _d)) = projector.project(q, boundary_tol, max_iter) else {
            continue;
        };
        if !bbox.contains(&p) {
            continue;
        }
        match make_boundary_point(projector, p, boundary_tol, tau_weak) {
            Ok(bp) => out.push(bp),
            Err(_) => continue,
        }
    }
    if out.len() < n {
        return Err(SamplingError::Undersampled {
            requested: n,
            got: out.len(),
            attempts,
        });
    }
    Ok(out)
}

/// Classify and annotate a point already on the boundary.
pub fn make_boundary_point(
    projector: &Projector,
    p: ComplexPoint2,
    boundary_tol: f64,
    tau_weak: f64,
) -> Result<BoundaryPoint, GeometryError> {
    let geom = projector.geometry();
    let classification = classify(geom, p, tau_weak, boundary_tol)?;
    let grad = geom.gradient_at(p)?;
    let levi_ll = geom.levi_ll_at(p)?;
    let a = obstruction_checked(geom, p, classification)?;
    Ok(BoundaryPoint {
        point: p,
        grad,
        levi_ll,
        classification,
        obstruction: a,
    })
}

/// Grow a collar off the listed boundary points: `q = p -/+ depth * n_p`
/// with the sign fixed by the side. Every grown point is reprojected and must
/// return to its foot point.
pub fn sample_collar(
    projector: &Projector,
    boundary: &[BoundaryPoint],
    depths: &[f64],
    side: Side,
    bbox: &Box4,
    boundary_tol: f64,
    max_iter: usize,
) -> Result<Vec<CollarSample>, SamplingError> {
    let geom = projector.geometry();
    let half_width = 0.1 * bbox.diameter();
    for &d in depths {
        if d <= 0.0 || d > half_width {
            return Err(SamplingError::DepthOutsideCollar {
                depth: d,
                half_width,
            });
        }
    }
    let mut out = Vec::with_capacity(boundary.len() * depths.len());
    for (idx, bp) in boundary.iter().enumerate() {
        let (n_vec, _) = geom.unit_normal_at(bp.point)?;
        for &depth in depths {
            let sign = match side {
                Side::Interior => -1.0,
                Side::Exterior => 1.0,
            };
            let q = crate::geometry::step_point(bp.point, &n_vec, sign * depth);
            let (p_back, _) = projector.project(q, boundary_tol, max_iter)?;
            let mismatch = p_back.distance(&bp.point);
            let allowed = (1e-6 * depth).max(20.0 * boundary_tol);
            if mismatch > allowed {
                return Err(SamplingError::CollarReprojection { depth, mismatch });
            }
            out.push(CollarSample {
                q,
                p: bp.point,
                d: sign * depth,
                boundary_idx: idx,
            });
        }
    }
    Ok(out)
}

/// Low-discrepancy points of `bbox` whose defining-function value lies in
/// `[lo, hi]`. Used for interior and exterior verification regions.
pub fn sample_region_band(
    projector: &Projector,
    bbox: &Box4,
    n: usize,
    seed: u64,
    band: Option<[f64; 2]>,
) -> Result<Vec<ComplexPoint2>, SamplingError> {
    let geom = projector.geometry();
    let mut seq = LowDiscrepancy4::new(seed ^ 0x5eed_ba5e);
    let mut out = Vec::with_capacity(n);
    let max_attempts = 512 * n.max(1);
    let mut attempts = 0;
    while out.len() < n && attempts < max_attempts {
        attempts += 1;
        let q = seq.next_in_box(bbox);
        match band {
            None => out.push(q),
            Some([lo, hi]) => {
                let Ok(v) = geom.rho_at(q) else { continue };
                if v >= lo && v <= hi {
                    out.push(q);
                }
            }
        }
    }
    if out.is_empty() {
        let [lo, hi] = band.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
        return Err(SamplingError::EmptyRegion { lo, hi });
    }
    Ok(out)
}
