//! Worked examples for the per-operation contracts not already covered by
//! module unit tests.

use num_complex::Complex64;
use plurisub_core::expr::{eval, fd_check, parse, WirtingerIndex, WirtingerOp};
use plurisub_core::geometry::{DomainGeometry, Projector};
use plurisub_core::transforms::{choose_c, estimate_constants, CollarSample, ConstantEstimates};
use plurisub_core::types::{Box4, ComplexPoint2, Side};
use plurisub_core::verify::{
    check_main_estimate, check_psh_on_boundary, estimate_df_exponent, obstruction_scan,
    refine_weak_points, sample_boundary, sample_collar, PipelineConfig, SamplingError,
    WeakRefineConfig,
};

fn example_rho() -> plurisub_core::ScalarField {
    parse("re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3")
        .unwrap()
}

fn ball() -> plurisub_core::ScalarField {
    parse("abs2(z1)+abs2(z2)-1").unwrap()
}

fn origin() -> ComplexPoint2 {
    ComplexPoint2::from_re_im(0.0, 0.0, 0.0, 0.0)
}

#[test]
fn eval_example_on_the_normal_line() {
    let v = eval(
        &example_rho(),
        ComplexPoint2::from_re_im(0.0, 0.0, -0.1, 0.0),
    )
    .unwrap();
    assert!((v - Complex64::new(-0.09, 0.0)).norm() < 1e-15);
}

#[test]
fn third_derivative_oracle_at_the_weak_point() {
    let idx = WirtingerIndex::new(vec![WirtingerOp::Z1, WirtingerOp::Z1Bar, WirtingerOp::Z2]);
    let check = fd_check(&example_rho(), &idx, origin(), 1e-3).unwrap();
    assert!((check.symbolic - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    assert!(
        check.discrepancy < 1e-5,
        "discrepancy {}",
        check.discrepancy
    );
}

#[test]
fn collar_quotient_for_the_ball() {
    // d / |rho| along the inward radius: d / (1 - (1-d)^2), largest at the
    // deepest sampled depth
    let rho = ball();
    let projector = Projector::new(&rho);
    let bbox = Box4::cube(1.2);
    let boundary = sample_boundary(&projector, &bbox, 50, 17, 1e-10, 1e-8, 200).unwrap();
    let depths = [0.01, 0.05, 0.1];
    let collar = sample_collar(
        &projector,
        &boundary,
        &depths,
        Side::Interior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    let geom = DomainGeometry::new(rho);
    let est = estimate_constants(&geom, &boundary, &collar).unwrap();
    assert!((est.c3 - 1.0).abs() < 1e-6, "c3 = {}", est.c3);
    let expected = 0.1 / (1.0 - 0.9f64 * 0.9);
    assert!((est.c4 - expected).abs() < 1e-3, "c4 = {}", est.c4);
    assert!(est.c4 >= 0.5 && est.c4 <= 0.53);
}

#[test]
fn estimate_constants_rejects_bad_samples() {
    let rho = ball();
    let geom = DomainGeometry::new(rho.clone());
    let projector = Projector::new(&rho);
    let bbox = Box4::cube(1.2);
    let boundary = sample_boundary(&projector, &bbox, 4, 21, 1e-10, 1e-8, 200).unwrap();
    assert!(estimate_constants(&geom, &[], &[]).is_err());
    // a "collar" point sitting on the boundary breaks the quotient
    let bad = CollarSample {
        q: boundary[0].point,
        p: boundary[0].point,
        d: 0.01,
        boundary_idx: 0,
    };
    assert!(estimate_constants(&geom, &boundary, &[bad]).is_err());
}

#[test]
fn choose_c_degenerate_obstruction_errors() {
    // slack below the obstruction guard makes a near-zero weak value
    // unusable in the quotient
    let est = ConstantEstimates {
        c3: 0.5,
        c4: 1.0,
        a_max: 1.0,
    };
    let err = choose_c(1e-11, &est, &[8e-13]).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("too close to zero"), "{msg}");
}

#[test]
fn anti_psh_field_fails_with_margin_minus_one() {
    let rho = ball();
    let projector = Projector::new(&rho);
    let boundary = sample_boundary(&projector, &Box4::cube(1.2), 32, 13, 1e-10, 1e-8, 200).unwrap();
    let f = parse("0 - abs2(z1)").unwrap();
    let report = check_psh_on_boundary(&f, &boundary, 1e-10).unwrap();
    assert!(!report.pass);
    assert!(
        (report.min_margin + 1.0).abs() < 1e-12,
        "margin {}",
        report.min_margin
    );
}

#[test]
fn ball_satisfies_the_interior_bound_unmodified() {
    let rho = ball();
    let projector = Projector::new(&rho);
    let bbox = Box4::cube(1.2);
    let boundary = sample_boundary(&projector, &bbox, 64, 19, 1e-10, 1e-8, 200).unwrap();
    let collar = sample_collar(
        &projector,
        &boundary,
        &[0.01, 0.05, 0.1],
        Side::Interior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    let report = check_main_estimate(&rho, 0.1, 0.1, &collar, Side::Interior, 1e-9).unwrap();
    assert!(report.pass, "min margin {}", report.min_margin);
    // exterior samples are rejected by the interior check
    let outer = sample_collar(
        &projector,
        &boundary,
        &[0.01],
        Side::Exterior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    assert!(check_main_estimate(&rho, 0.1, 0.1, &outer, Side::Interior, 1e-9).is_err());
}

#[test]
fn repaired_function_has_flat_weak_set() {
    // the repaired example keeps a weak curve but its obstruction vanishes
    let rho = parse("re(z2) + abs2(z2) + abs2(z1)^2").unwrap();
    let projector = Projector::new(&rho);
    let bbox = Box4::cube(0.5);
    let samples = sample_boundary(&projector, &bbox, 300, 23, 1e-10, 1e-8, 200).unwrap();
    let weak = refine_weak_points(
        &projector,
        &samples,
        &bbox,
        &WeakRefineConfig::default(),
        23,
    );
    assert!(
        !weak.is_empty(),
        "weak set of the repaired function not found"
    );
    let table = obstruction_scan(&projector, &samples, &weak).unwrap();
    assert!(table.weak_count > 0);
    let max_a = table.max_obstruction.unwrap();
    assert!(max_a.abs() <= 1e-6, "largest obstruction {max_a}");
}

#[test]
fn obstruction_scan_of_the_ball_is_empty() {
    let rho = ball();
    let projector = Projector::new(&rho);
    let bbox = Box4::cube(1.2);
    let samples = sample_boundary(&projector, &bbox, 64, 29, 1e-10, 1e-8, 200).unwrap();
    let weak = refine_weak_points(
        &projector,
        &samples,
        &bbox,
        &WeakRefineConfig::default(),
        29,
    );
    let table = obstruction_scan(&projector, &samples, &weak).unwrap();
    assert_eq!(table.weak_count, 0);
    assert!(table.max_obstruction.is_none());
}

#[test]
fn df_exponent_with_empty_region_errors() {
    let cfg = PipelineConfig {
        n_boundary: 32,
        depths: vec![1e-3, 1e-2],
        // a band no sample can satisfy
        region_band_interior: Some([-3.0, -2.5]),
        ..PipelineConfig::default()
    };
    let err = estimate_df_exponent(&ball(), Box4::cube(1.2), cfg, Side::Interior).unwrap_err();
    match err {
        plurisub_core::verify::VerifyError::Sampling(SamplingError::EmptyRegion { .. }) => {}
        other => panic!("expected empty region, got {other}"),
    }
}

#[test]
fn undamped_normal_segment_fails_the_interior_bound() {
    // the obstruction pushes the tangential eigenvalue negative along the
    // inward normal at the origin, and no boost can fix the L-direction
    let rho = example_rho();
    let geom = DomainGeometry::new(rho.clone());
    let projector = Projector::new(&rho);
    let p = origin();
    let bp =
        plurisub_core::verify::sampling::make_boundary_point(&projector, p, 1e-10, 1e-8).unwrap();
    let bbox = Box4::new([
        [-0.25, 0.25],
        [-0.25, 0.25],
        [-0.18, 0.02],
        [-0.0075, 0.0075],
    ]);
    let collar = sample_collar(
        &projector,
        &[bp],
        &[1e-3, 5e-3, 1e-2],
        Side::Interior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    let report = check_main_estimate(&rho, 0.1, 0.0, &collar, Side::Interior, 1e-9).unwrap();
    assert!(!report.pass, "margin {}", report.min_margin);
    assert!(report.min_margin < -1e-4);
    let _ = geom;
}

#[test]
fn projected_point_off_the_slice_is_strict() {
    let rho = example_rho();
    let projector = Projector::new(&rho);
    let geom = DomainGeometry::new(rho);
    let q = ComplexPoint2::from_re_im(0.3, 0.0, -0.05, 0.0);
    let (p, _) = projector.project(q, 1e-10, 200).unwrap();
    let class = plurisub_core::geometry::classify(&geom, p, 1e-8, 1e-10).unwrap();
    assert_eq!(class, plurisub_core::Classification::Strict);
}

#[test]
fn example_boundary_gradient_floor() {
    // over the patch near the origin the smallest boundary gradient cannot
    // exceed the value 1/2 attained at the origin
    let rho = example_rho();
    let projector = Projector::new(&rho);
    let bbox = Box4::new([
        [-0.25, 0.25],
        [-0.25, 0.25],
        [-0.18, 0.02],
        [-0.0075, 0.0075],
    ]);
    let boundary = sample_boundary(&projector, &bbox, 200, 31, 1e-10, 1e-8, 200).unwrap();
    for bp in &boundary {
        let rho_p = eval(&example_rho(), bp.point).unwrap();
        assert!(rho_p.norm() <= 1e-10, "|rho| = {}", rho_p.norm());
    }
    let collar = sample_collar(
        &projector,
        &boundary,
        &[1e-4, 1e-3],
        Side::Interior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    let geom = DomainGeometry::new(rho);
    let est = estimate_constants(&geom, &boundary, &collar).unwrap();
    assert!(est.c3 <= 0.5 + 1e-3, "c3 = {}", est.c3);
    assert!(est.c3 > 0.4, "c3 = {}", est.c3);
}

#[test]
fn collar_growth_follows_the_origin_normal() {
    let rho = example_rho();
    let projector = Projector::new(&rho);
    let bp =
        plurisub_core::verify::sampling::make_boundary_point(&projector, origin(), 1e-10, 1e-8)
            .unwrap();
    let bbox = Box4::new([
        [-0.25, 0.25],
        [-0.25, 0.25],
        [-0.18, 0.02],
        [-0.0075, 0.0075],
    ]);
    let inward = sample_collar(
        &projector,
        std::slice::from_ref(&bp),
        &[0.01],
        Side::Interior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    let q = inward[0].q;
    assert!(q.z1.norm() < 1e-12);
    assert!(
        (q.z2 - Complex64::new(-0.01, 0.0)).norm() < 1e-12,
        "q = {q}"
    );
    let outward = sample_collar(
        &projector,
        &[bp],
        &[0.01],
        Side::Exterior,
        &bbox,
        1e-10,
        200,
    )
    .unwrap();
    assert!((outward[0].q.z2 - Complex64::new(0.01, 0.0)).norm() < 1e-12);
}

#[test]
fn pluriharmonic_field_fails_the_strict_check() {
    let g = parse("re(z1)").unwrap();
    let region = vec![
        ComplexPoint2::from_re_im(0.1, 0.2, -0.3, 0.0),
        ComplexPoint2::from_re_im(-0.4, 0.0, 0.2, 0.1),
    ];
    let report = plurisub_core::verify::check_strict_psh(&g, &region, 1e-6, 0.0).unwrap();
    assert!(!report.pass);
    assert!(
        (report.min_margin + 1e-6).abs() < 1e-18,
        "margin {}",
        report.min_margin
    );
}

#[test]
fn frame_evaluation_rejects_critical_points() {
    let geom = DomainGeometry::new(ball());
    let fr = geom.frame();
    match fr.at(origin()) {
        Err(plurisub_core::geometry::GeometryError::DegenerateGradient { .. }) => {}
        other => panic!("expected degenerate gradient, got {other:?}"),
    }
}
