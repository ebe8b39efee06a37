//! End-to-end pipeline checks on the two reference domains.

use plurisub_core::expr::parse;
use plurisub_core::types::{Box4, Side};
use plurisub_core::verify::{Pipeline, PipelineConfig};

fn example_box() -> Box4 {
    Box4::new([
        [-0.25, 0.25],
        [-0.25, 0.25],
        [-0.18, 0.02],
        [-0.0075, 0.0075],
    ])
}

fn example_rho() -> plurisub_core::ScalarField {
    parse("re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3")
        .unwrap()
}

fn example_config(n: usize) -> PipelineConfig {
    PipelineConfig {
        n_boundary: n,
        depths: vec![1e-5, 5.6234e-5, 3.1623e-4, 1.7783e-3, 1e-2],
        seed: 20260809,
        epsilon: 0.1,
        region_band_interior: Some([-0.02, -1e-4]),
        region_band_exterior: Some([1e-4, 0.02]),
        region_n: 400,
        ..PipelineConfig::default()
    }
}

#[test]
fn example_domain_verifies_with_damping() {
    let pipeline = Pipeline::new(&example_rho(), example_box(), example_config(200));
    let prep = pipeline.prepare().unwrap();
    assert!(!prep.weak.is_empty(), "weak set not found");
    let outcome = pipeline.verify(&prep).unwrap();
    assert!(
        outcome.interior.c > 0.0,
        "expected a positive damping multiplier"
    );
    assert!(
        outcome.interior.report.pass,
        "interior failed: min margin {} at {:?}",
        outcome.interior.report.min_margin, outcome.interior.report.argmin
    );
    assert!(
        outcome.exterior.report.pass,
        "exterior failed: min margin {} at {:?}",
        outcome.exterior.report.min_margin, outcome.exterior.report.argmin
    );
}

#[test]
fn example_domain_fails_without_damping() {
    let mut cfg = example_config(200);
    cfg.forced_c = Some(0.0);
    cfg.forced_k = Some(0.0);
    let pipeline = Pipeline::new(&example_rho(), example_box(), cfg);
    let prep = pipeline.prepare().unwrap();
    let outcome = pipeline.verify(&prep).unwrap();
    assert!(
        !outcome.interior.report.pass,
        "undamped interior check must fail"
    );
    // the witness sits near the normal line of the origin: z1 = 0, z2 real
    let witness = outcome
        .interior
        .report
        .argmin
        .expect("failing check has a witness")
        .to_point();
    let dist_to_line = (witness.z1.norm_sqr() + witness.z2.im * witness.z2.im).sqrt();
    assert!(
        dist_to_line <= 1e-2,
        "witness {witness} is {dist_to_line} from the normal line"
    );
}

#[test]
fn ball_verifies_without_damping() {
    let cfg = PipelineConfig {
        n_boundary: 100,
        depths: vec![1e-4, 1e-3, 1e-2, 5e-2, 1e-1],
        seed: 11,
        epsilon: 0.1,
        ..PipelineConfig::default()
    };
    let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
    let pipeline = Pipeline::new(&rho, Box4::cube(1.2), cfg);
    let prep = pipeline.prepare().unwrap();
    assert!(prep.weak.is_empty());
    let outcome = pipeline.verify(&prep).unwrap();
    assert_eq!(outcome.interior.c, 0.0);
    assert!(
        outcome.pass,
        "ball must verify: {}",
        outcome.interior.report.min_margin
    );
    // sampled constants of the unit ball
    assert!(
        (prep.estimates.c3 - 1.0).abs() < 1e-6,
        "c3 = {}",
        prep.estimates.c3
    );
    assert!(
        prep.estimates.c4 >= 0.5 && prep.estimates.c4 <= 0.53,
        "c4 = {}",
        prep.estimates.c4
    );
}

#[test]
fn ball_df_exponent_reaches_high_eta() {
    let cfg = PipelineConfig {
        n_boundary: 100,
        depths: vec![1e-4, 1e-3, 1e-2, 5e-2, 1e-1],
        seed: 11,
        epsilon: 0.1,
        region_band_interior: Some([-1.0, -0.0199]),
        region_band_exterior: Some([1e-4, 0.21]),
        region_n: 600,
        ..PipelineConfig::default()
    };
    let rho = parse("abs2(z1)+abs2(z2)-1").unwrap();
    let pipeline = Pipeline::new(&rho, Box4::cube(1.2), cfg);
    let prep = pipeline.prepare().unwrap();
    let interior = pipeline
        .df_exponent(&prep, Side::Interior, &[0.5, 0.9, 0.99])
        .unwrap();
    assert!(
        interior.best_eta.unwrap_or(0.0) >= 0.99,
        "interior exponent rows: {:?}",
        interior.rows
    );
    let exterior = pipeline
        .df_exponent(&prep, Side::Exterior, &[1.5, 2.0])
        .unwrap();
    assert!(
        exterior.best_eta.unwrap_or(0.0) >= 2.0,
        "exterior exponent rows: {:?}",
        exterior.rows
    );
}

#[test]
fn example_df_exponent_reaches_09() {
    let pipeline = Pipeline::new(&example_rho(), example_box(), example_config(150));
    let prep = pipeline.prepare().unwrap();
    let interior = pipeline
        .df_exponent(&prep, Side::Interior, &[0.5, 0.75, 0.9])
        .unwrap();
    assert!(
        interior.best_eta.unwrap_or(0.0) >= 0.9,
        "interior exponent rows: {:?}",
        interior.rows
    );
}
