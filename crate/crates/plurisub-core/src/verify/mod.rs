//! Sampling machinery and the Hessian inequality checks.
//!
//! Every "for all directions xi" inequality over C^2 is decided exactly by
//! 2x2 Hermitian eigenvalue analysis (trace and determinant), never by
//! sampling directions. Per-sample margins are collected in input order and
//! reduced sequentially, so reports are deterministic for a fixed
//! configuration and seed.

pub mod report;
pub mod sampling;
pub mod weak;

pub use report::{ArgminPoint, EtaRow, ReportParams, VerificationReport};
pub use sampling::{
    sample_boundary, sample_collar, sample_region_band, LowDiscrepancy4, SamplingError,
};
pub use weak::{refine_weak_points, WeakRefineConfig};

use crate::expr::{EvalError, Program, ScalarField, WirtingerOp};
use crate::geometry::{BoundaryPoint, DomainGeometry, GeometryError, Projector};
use crate::transforms::{
    choose_c, df_exterior, df_interior, estimate_constants, modified_defining_with_sigma,
    quadratic_boost, sigma_from_geometry, CollarSample, ConstantEstimates, TransformError,
    TransformParams,
};
use crate::types::{Box4, Classification, ComplexCovector2, ComplexPoint2, HermitianForm2, Side};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("collar sample with signed distance {d:e} fed to the {expected} check")]
    WrongSide { expected: Side, d: f64 },
    #[error("the quadratic boost search exhausted its cap at K = {k}")]
    BoostCapExhausted { k: f64 },
}

/// Evaluates the Levi form, the Wirtinger gradient and the value of one
/// field through a single compiled tape.
pub struct FieldAnalyzer {
    program: Program,
}

pub struct FieldData {
    pub levi: HermitianForm2,
    pub grad: ComplexCovector2,
    pub value: f64,
}

impl FieldAnalyzer {
    pub fn new(f: &ScalarField) -> Self {
        let dz1 = crate::expr::differentiate(f, WirtingerOp::Z1);
        let dz2 = crate::expr::differentiate(f, WirtingerOp::Z2);
        let h11 = crate::expr::differentiate(&dz1, WirtingerOp::Z1Bar);
        let h12 = crate::expr::differentiate(&dz1, WirtingerOp::Z2Bar);
        let h21 = crate::expr::differentiate(&dz2, WirtingerOp::Z1Bar);
        let h22 = crate::expr::differentiate(&dz2, WirtingerOp::Z2Bar);
        let program = Program::compile(&[&h11, &h12, &h21, &h22, &dz1, &dz2, f]);
        FieldAnalyzer { program }
    }

    pub fn tape_len(&self) -> usize {
        self.program.len()
    }

    pub fn at(
        &self,
        q: ComplexPoint2,
        scratch: &mut Vec<num_complex::Complex64>,
        out: &mut Vec<num_complex::Complex64>,
    ) -> Result<FieldData, EvalError> {
        self.program.run(q, scratch, out)?;
        let levi = HermitianForm2 {
            h11: out[0].re,
            h12: 0.5 * (out[1] + out[2].conj()),
            h22: out[3].re,
        };
        let grad = ComplexCovector2([out[4], out[5]]);
        Ok(FieldData {
            levi,
            grad,
            value: out[6].re,
        })
    }
}

/// Per-point plurisubharmonicity on the boundary: the margin is the smallest
/// Levi eigenvalue; a point passes when it stays above `-tol` times the
/// local Hessian scale.
pub fn check_psh_on_boundary(
    f: &ScalarField,
    boundary: &[BoundaryPoint],
    tol: f64,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let analyzer = FieldAnalyzer::new(f);
    let mut scratch = Vec::new();
    let mut buf = Vec::new();
    let mut margins = Vec::with_capacity(boundary.len());
    let mut ok = Vec::with_capacity(boundary.len());
    let points: Vec<ComplexPoint2> = boundary.iter().map(|b| b.point).collect();
    for p in &points {
        let data = analyzer.at(*p, &mut scratch, &mut buf)?;
        let margin = data.levi.min_eigenvalue();
        margins.push(margin);
        ok.push(margin >= -tol * data.levi.tolerance_scale());
    }
    Ok(VerificationReport::from_margins(
        "psh-boundary",
        ReportParams::default(),
        tol,
        &points,
        margins,
        &ok,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

/// The two-sided Hessian lower bound on a collar.
///
/// Interior: `H_{r1}(xi,xi)(q) >= eps r1(q) |xi|^2 + K |<d r1, xi>|^2`,
/// decided as positive semidefiniteness of
/// `M(q) = Levi(r1)(q) - eps r1(q) I - K G(q)` with `G` the rank-one form of
/// the gradient. Exterior flips the sign of the eps term.
pub fn check_main_estimate(
    r1: &ScalarField,
    epsilon: f64,
    k: f64,
    collar: &[CollarSample],
    side: Side,
    tol: f64,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    for cs in collar {
        let wrong = match side {
            Side::Interior => cs.d >= 0.0,
            Side::Exterior => cs.d <= 0.0,
        };
        if wrong {
            return Err(VerifyError::WrongSide {
                expected: side,
                d: cs.d,
            });
        }
    }
    let analyzer = FieldAnalyzer::new(r1);
    let mut scratch = Vec::new();
    let mut buf = Vec::new();
    let points: Vec<ComplexPoint2> = collar.iter().map(|c| c.q).collect();
    let mut margins = Vec::with_capacity(points.len());
    let mut ok = Vec::with_capacity(points.len());
    let eps_sign = match side {
        Side::Interior => -1.0,
        Side::Exterior => 1.0,
    };
    for q in &points {
        let data = analyzer.at(*q, &mut scratch, &mut buf)?;
        let m = data
            .levi
            .shift(eps_sign * epsilon * data.value)
            .add(&HermitianForm2::rank_one(&data.grad).scale(-k));
        let margin = m.min_eigenvalue();
        margins.push(margin);
        ok.push(margin >= -tol * data.levi.tolerance_scale());
    }
    let name = match side {
        Side::Interior => "main-estimate-interior",
        Side::Exterior => "main-estimate-exterior",
    };
    let params = ReportParams {
        epsilon: Some(epsilon),
        k: Some(k),
        ..ReportParams::default()
    };
    Ok(VerificationReport::from_margins(
        name,
        params,
        tol,
        &points,
        margins,
        &ok,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

/// Strict plurisubharmonicity over a region: margin is the smallest Levi
/// eigenvalue minus the floor.
pub fn check_strict_psh(
    g: &ScalarField,
    region: &[ComplexPoint2],
    floor: f64,
    tol: f64,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let analyzer = FieldAnalyzer::new(g);
    let mut scratch = Vec::new();
    let mut buf = Vec::new();
    let mut margins = Vec::with_capacity(region.len());
    let mut ok = Vec::with_capacity(region.len());
    for q in region {
        let data = analyzer.at(*q, &mut scratch, &mut buf)?;
        let margin = data.levi.min_eigenvalue() - floor;
        margins.push(margin);
        ok.push(margin >= -tol);
    }
    Ok(VerificationReport::from_margins(
        "strict-psh",
        ReportParams::default(),
        tol,
        region,
        margins,
        &ok,
        start.elapsed().as_secs_f64() * 1e3,
    ))
}

/// One row of an obstruction scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub point: ComplexPoint2,
    pub rho: f64,
    pub classification: Classification,
    pub levi_ll: f64,
    /// Obstruction value; only meaningful (and only reported) at weak points.
    pub obstruction: Option<f64>,
    /// Smallest Levi eigenvalue of rho at the point.
    pub margin: f64,
}

/// Classification table over boundary samples plus the refined weak set.
#[derive(Debug, Clone)]
pub struct ObstructionTable {
    pub rows: Vec<ScanRow>,
    pub weak_count: usize,
    pub max_obstruction: Option<f64>,
}

/// Tabulate classification and obstruction values over the sampled boundary,
/// including weak points found by refinement.
pub fn obstruction_scan(
    projector: &Projector,
    samples: &[BoundaryPoint],
    weak: &[BoundaryPoint],
) -> Result<ObstructionTable, VerifyError> {
    let geom = projector.geometry();
    let mut rows = Vec::with_capacity(samples.len() + weak.len());
    let mut weak_count = 0;
    let mut max_obstruction: Option<f64> = None;
    for bp in samples.iter().chain(weak.iter()) {
        let levi = geom.levi_at(bp.point)?;
        let rho = geom.rho_at(bp.point)?;
        let obstruction = match bp.classification {
            Classification::Weak => {
                weak_count += 1;
                max_obstruction =
                    Some(max_obstruction.map_or(bp.obstruction, |m: f64| m.max(bp.obstruction)));
                Some(bp.obstruction)
            }
            Classification::Strict => None,
        };
        rows.push(ScanRow {
            point: bp.point,
            rho,
            classification: bp.classification,
            levi_ll: bp.levi_ll,
            obstruction,
            margin: levi.min_eigenvalue(),
        });
    }
    Ok(ObstructionTable {
        rows,
        weak_count,
        max_obstruction,
    })
}

/// Geometric spacing between two positive endpoints, inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Configuration of the end-to-end pipelines.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub boundary_tol: f64,
    pub tau_weak: f64,
    /// Tolerance of the main-estimate margins.
    pub psd_tol: f64,
    /// Strictness floor for the exhaustion checks.
    pub floor: f64,
    pub n_boundary: usize,
    /// Collar depths; empty means log-spaced defaults scaled by the box
    /// diameter.
    pub depths: Vec<f64>,
    pub seed: u64,
    pub epsilon: f64,
    /// Fixed damping multiplier; `None` selects it from the weak samples.
    pub forced_c: Option<f64>,
    /// Fixed boost coefficient; `None` doubles it until the collar check
    /// passes.
    pub forced_k: Option<f64>,
    pub eta_grid_interior: Vec<f64>,
    pub eta_grid_exterior: Vec<f64>,
    pub region_n: usize,
    /// Defining-function band selecting the interior verification region;
    /// `None` reuses the interior collar points.
    pub region_band_interior: Option<[f64; 2]>,
    pub region_band_exterior: Option<[f64; 2]>,
    pub projection_max_iter: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            boundary_tol: 1e-10,
            tau_weak: 1e-8,
            psd_tol: 1e-9,
            floor: 1e-8,
            n_boundary: 400,
            depths: Vec::new(),
            seed: 7,
            epsilon: 0.1,
            forced_c: None,
            forced_k: None,
            eta_grid_interior: vec![0.5, 0.75, 0.9, 0.95, 0.99],
            eta_grid_exterior: vec![1.5, 2.0],
            region_n: 600,
            region_band_interior: None,
            region_band_exterior: None,
            projection_max_iter: 200,
        }
    }
}

/// Boundary, collar and constant data shared by the checks.
pub struct Prepared {
    /// Raw samples followed by the refined weak points.
    pub boundary: Vec<BoundaryPoint>,
    pub n_raw_boundary: usize,
    pub weak: Vec<BoundaryPoint>,
    pub collar_in: Vec<CollarSample>,
    pub collar_out: Vec<CollarSample>,
    pub estimates: ConstantEstimates,
    pub depths: Vec<f64>,
}

/// Result of one side of the defining-function verification.
#[derive(Debug)]
pub struct SideOutcome {
    pub report: VerificationReport,
    pub c: f64,
    pub k: f64,
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub interior: SideOutcome,
    pub exterior: SideOutcome,
    pub pass: bool,
}

#[derive(Debug)]
pub struct DfOutcome {
    pub rows: Vec<EtaRow>,
    pub best_eta: Option<f64>,
    pub reports: Vec<VerificationReport>,
}

/// End-to-end verification pipelines for one domain.
pub struct Pipeline {
    geom: DomainGeometry,
    projector: Projector,
    sigma: ScalarField,
    bbox: Box4,
    pub cfg: PipelineConfig,
}

impl Pipeline {
    pub fn new(rho: &ScalarField, bbox: Box4, cfg: PipelineConfig) -> Self {
        let geom = DomainGeometry::new(rho.clone());
        let projector = Projector::new(rho);
        let sigma = sigma_from_geometry(&geom);
        Pipeline {
            geom,
            projector,
            sigma,
            bbox,
            cfg,
        }
    }

    pub fn geometry(&self) -> &DomainGeometry {
        &self.geom
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn sigma_field(&self) -> &ScalarField {
        &self.sigma
    }

    pub fn bbox(&self) -> &Box4 {
        &self.bbox
    }

    fn resolved_depths(&self) -> Vec<f64> {
        if !self.cfg.depths.is_empty() {
            return self.cfg.depths.clone();
        }
        let diam = self.bbox.diameter();
        log_spaced(1e-5 * diam, 1e-1 * diam, 5)
    }

    /// Sample the boundary, refine the weak set, grow both collars and
    /// estimate the constants.
    pub fn prepare(&self) -> Result<Prepared, VerifyError> {
        let cfg = &self.cfg;
        let samples = sample_boundary(
            &self.projector,
            &self.bbox,
            cfg.n_boundary,
            cfg.seed,
            cfg.boundary_tol,
            cfg.tau_weak,
            cfg.projection_max_iter,
        )?;
        let weak_cfg = WeakRefineConfig {
            tau_weak: cfg.tau_weak,
            boundary_tol: cfg.boundary_tol,
            projection_max_iter: cfg.projection_max_iter,
            ..WeakRefineConfig::default()
        };
        let weak = refine_weak_points(&self.projector, &samples, &self.bbox, &weak_cfg, cfg.seed);
        let n_raw_boundary = samples.len();
        let mut boundary = samples;
        boundary.extend(weak.iter().cloned());
        let depths = self.resolved_depths();
        let collar_in = sample_collar(
            &self.projector,
            &boundary,
            &depths,
            Side::Interior,
            &self.bbox,
            cfg.boundary_tol,
            cfg.projection_max_iter,
        )?;
        let collar_out = sample_collar(
            &self.projector,
            &boundary,
            &depths,
            Side::Exterior,
            &self.bbox,
            cfg.boundary_tol,
            cfg.projection_max_iter,
        )?;
        let estimates = estimate_constants(&self.geom, &boundary, &collar_in)?;
        Ok(Prepared {
            boundary,
            n_raw_boundary,
            weak,
            collar_in,
            collar_out,
            estimates,
            depths,
        })
    }

    /// Obstruction values for the weak samples, reflected for the exterior
    /// side where the damping has to counteract decreasing tangential
    /// curvature along the outward normal.
    fn signed_obstructions(prep: &Prepared, side: Side) -> Vec<f64> {
        prep.weak
            .iter()
            .map(|w| match side {
                Side::Interior => w.obstruction,
                Side::Exterior => -w.obstruction,
            })
            .collect()
    }

    fn damping_for(&self, prep: &Prepared, epsilon: f64, side: Side) -> Result<f64, VerifyError> {
        if let Some(c) = self.cfg.forced_c {
            return Ok(c);
        }
        let aps = Self::signed_obstructions(prep, side);
        Ok(choose_c(epsilon, &prep.estimates, &aps)?)
    }

    /// Build `r1 = r + K r^2` and grow K by doubling until the collar check
    /// passes. Honors `forced_k` and an optional upper cap.
    fn boosted_check(
        &self,
        r: &ScalarField,
        epsilon: f64,
        collar: &[CollarSample],
        side: Side,
        k_cap: Option<f64>,
    ) -> Result<(f64, ScalarField, VerificationReport), VerifyError> {
        if let Some(k) = self.cfg.forced_k {
            let r1 = quadratic_boost(r, k);
            let report = check_main_estimate(&r1, epsilon, k, collar, side, self.cfg.psd_tol)?;
            return Ok((k, r1, report));
        }
        let cap = k_cap.unwrap_or(f64::INFINITY);
        let mut k = 1.0f64.min(cap);
        let mut best: Option<(f64, ScalarField, VerificationReport)> = None;
        loop {
            let r1 = quadratic_boost(r, k);
            let report = check_main_estimate(&r1, epsilon, k, collar, side, self.cfg.psd_tol)?;
            let better = best
                .as_ref()
                .map(|(_, _, b)| report.min_margin > b.min_margin)
                .unwrap_or(true);
            let passed = report.pass;
            if better || passed {
                best = Some((k, r1, report));
            }
            if passed {
                break;
            }
            if k >= cap || k >= 65536.0 {
                break;
            }
            k = (k * 2.0).min(cap);
        }
        Ok(best.expect("at least one boost candidate"))
    }

    fn verify_side(&self, prep: &Prepared, side: Side) -> Result<SideOutcome, VerifyError> {
        let epsilon = self.cfg.epsilon;
        let c = self.damping_for(prep, epsilon, side)?;
        let r = modified_defining_with_sigma(self.geom.rho(), &self.sigma, c, side);
        let collar = match side {
            Side::Interior => &prep.collar_in,
            Side::Exterior => &prep.collar_out,
        };
        let (k, _r1, mut report) = self.boosted_check(&r, epsilon, collar, side, None)?;
        report.params.c = Some(c);
        report.params.c3 = Some(prep.estimates.c3);
        report.params.c4 = Some(prep.estimates.c4);
        Ok(SideOutcome { report, c, k })
    }

    /// Run the interior and exterior defining-function checks.
    pub fn verify(&self, prep: &Prepared) -> Result<VerifyOutcome, VerifyError> {
        let interior = self.verify_side(prep, Side::Interior)?;
        let exterior = self.verify_side(prep, Side::Exterior)?;
        let pass = interior.report.pass && exterior.report.pass;
        Ok(VerifyOutcome {
            interior,
            exterior,
            pass,
        })
    }

    /// Points of the verification region for one side.
    pub fn region_points(
        &self,
        prep: &Prepared,
        side: Side,
    ) -> Result<Vec<ComplexPoint2>, VerifyError> {
        let band = match side {
            Side::Interior => self.cfg.region_band_interior,
            Side::Exterior => self.cfg.region_band_exterior,
        };
        match band {
            Some(b) => Ok(sample_region_band(
                &self.projector,
                &self.bbox,
                self.cfg.region_n,
                self.cfg.seed,
                Some(b),
            )?),
            None => {
                let collar = match side {
                    Side::Interior => &prep.collar_in,
                    Side::Exterior => &prep.collar_out,
                };
                Ok(collar.iter().map(|c| c.q).collect())
            }
        }
    }

    /// Sweep the exhaustion exponent over a grid and report the largest
    /// value whose exhaustion function is strictly plurisubharmonic on the
    /// region.
    pub fn df_exponent(
        &self,
        prep: &Prepared,
        side: Side,
        grid: &[f64],
    ) -> Result<DfOutcome, VerifyError> {
        let region = self.region_points(prep, side)?;
        // D = max |z|^2 over everything the estimate touches
        let d_max = region
            .iter()
            .chain(prep.boundary.iter().map(|b| &b.point))
            .map(|p| p.norm() * p.norm())
            .fold(0.0f64, f64::max)
            .max(1e-9);
        let collar = match side {
            Side::Interior => &prep.collar_in,
            Side::Exterior => &prep.collar_out,
        };
        let mut rows = Vec::with_capacity(grid.len());
        let mut reports = Vec::with_capacity(grid.len());
        for &eta in grid {
            let mut params = TransformParams::for_exponent(eta, d_max, side, 0.0, 0.0)?;
            params.c = self.damping_for(prep, params.epsilon, side)?;
            let r = modified_defining_with_sigma(self.geom.rho(), &self.sigma, params.c, side);
            // keep 1 + 2 K r well away from zero over the whole region
            let r_analyzer = Program::compile(&[&r]);
            let mut r_max: f64 = 0.0;
            for q in &region {
                let v = r_analyzer.eval_at(*q)?;
                r_max = r_max.max(v[0].norm());
            }
            let k_cap = if r_max > 0.0 {
                0.25 / r_max
            } else {
                f64::INFINITY
            };
            let (k, r1, _collar_report) =
                self.boosted_check(&r, params.epsilon, collar, side, Some(k_cap))?;
            params.k = k;
            let g = match side {
                Side::Interior => df_interior(&r1, params.eta, params.delta)?,
                Side::Exterior => df_exterior(&r1, params.eta, params.delta)?,
            };
            let mut report = check_strict_psh(&g, &region, self.cfg.floor, 0.0)?;
            report.check = format!("df-{side}");
            report.params = ReportParams {
                epsilon: Some(params.epsilon),
                k: Some(params.k),
                c: Some(params.c),
                eta: Some(params.eta),
                delta: Some(params.delta),
                d_max: Some(params.d_max),
                c3: Some(prep.estimates.c3),
                c4: Some(prep.estimates.c4),
            };
            rows.push(EtaRow {
                side,
                eta: params.eta,
                delta: params.delta,
                epsilon: params.epsilon,
                c: params.c,
                k: params.k,
                pass: report.pass,
                min_margin: report.min_margin,
            });
            reports.push(report);
        }
        let best_eta = rows
            .iter()
            .filter(|r| r.pass)
            .map(|r| r.eta)
            .fold(None, |acc, eta| {
                Some(match acc {
                    None => eta,
                    Some(b) if eta > b => eta,
                    Some(b) => b,
                })
            });
        Ok(DfOutcome {
            rows,
            best_eta,
            reports,
        })
    }
}

/// Convenience wrapper: run the exponent sweep for a domain with the given
/// region and grid.
pub fn estimate_df_exponent(
    rho: &ScalarField,
    bbox: Box4,
    cfg: PipelineConfig,
    side: Side,
) -> Result<DfOutcome, VerifyError> {
    let grid = match side {
        Side::Interior => cfg.eta_grid_interior.clone(),
        Side::Exterior => cfg.eta_grid_exterior.clone(),
    };
    let pipeline = Pipeline::new(rho, bbox, cfg);
    let prep = pipeline.prepare()?;
    pipeline.df_exponent(&prep, side, &grid)
}
