//! Command behavior: exit codes, outputs, fixture handling.

use plurisub_cli::commands::{
    cmd_classify, cmd_df_exponent, cmd_selftest, cmd_verify, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS,
};
use plurisub_cli::config::DomainConfig;
use plurisub_cli::fixtures::fixture;
use std::path::PathBuf;
use std::process::Command;

fn outdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("plurisub-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read_report(dir: &std::path::Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn classify_example_reports_the_obstruction() {
    let cfg = fixture("example-2-3").unwrap();
    let out = outdir("classify-example");
    let code = cmd_classify("example-2-3", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_PASS);
    let report = read_report(&out);
    let max_a = report["max_A"].as_f64().unwrap();
    assert!((max_a - 0.5).abs() < 1e-6, "max_A = {max_a}");
    assert!(report["weak_count"].as_u64().unwrap() > 0);
    // the CSV has a header and one row per sample
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "z1re,z1im,z2re,z2im,rho,dist,class,A_p,margin"
    );
    assert_eq!(
        csv.lines().count() as u64 - 1,
        report["n_samples"].as_u64().unwrap()
    );
}

#[test]
fn classify_ball_sees_no_weak_points() {
    let cfg = fixture("ball").unwrap();
    let out = outdir("classify-ball");
    let code = cmd_classify("ball", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_PASS);
    let report = read_report(&out);
    assert_eq!(report["weak_count"].as_u64().unwrap(), 0);
    assert!(report["max_A"].is_null());
}

#[test]
fn malformed_expression_is_a_config_error_with_position() {
    let mut cfg = fixture("ball").unwrap();
    cfg.rho = "re(z1".to_string();
    let err = cfg.validate().unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("offset 5"), "message: {msg}");
}

#[test]
fn verify_ball_needs_no_damping() {
    let cfg = fixture("ball").unwrap();
    let out = outdir("verify-ball");
    let code = cmd_verify("ball", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_PASS);
    let report = read_report(&out);
    assert_eq!(report["interior"]["C"].as_f64().unwrap(), 0.0);
    assert!(report["pass"].as_bool().unwrap());
}

#[test]
fn verify_example_chooses_a_positive_multiplier() {
    let cfg = fixture("example-2-3").unwrap();
    let out = outdir("verify-example");
    let code = cmd_verify("example-2-3", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_PASS);
    let report = read_report(&out);
    assert!(report["interior"]["C"].as_f64().unwrap() > 0.0);
    assert!(report["interior"]["report"]["pass"].as_bool().unwrap());
    assert!(report["exterior"]["report"]["pass"].as_bool().unwrap());
}

#[test]
fn df_exponent_uses_the_default_grid() {
    let mut cfg = fixture("ball").unwrap();
    cfg.eta_grid = None;
    let out = outdir("df-ball");
    let code = cmd_df_exponent("ball", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_PASS);
    let csv = std::fs::read_to_string(out.join("df.csv")).unwrap();
    for eta in ["0.5", "0.75", "0.9", "0.95", "0.99"] {
        assert!(
            csv.lines()
                .any(|l| l.starts_with(&format!("interior,{eta},"))),
            "missing eta {eta} in:\n{csv}"
        );
    }
    let report = read_report(&out);
    assert!(report["best_eta_interior"].as_f64().unwrap() >= 0.99);
    assert!(report["best_eta_exterior"].as_f64().unwrap() >= 2.0);
}

#[test]
fn selftest_passes_on_builtins_and_catches_a_flipped_sign() {
    let domains: Vec<(String, DomainConfig)> = ["ball", "example-2-3"]
        .iter()
        .map(|n| (n.to_string(), fixture(n).unwrap()))
        .collect();
    assert_eq!(cmd_selftest(&domains, false).unwrap(), EXIT_PASS);

    let mut flipped = fixture("ball").unwrap();
    flipped.rho = "1-abs2(z1)-abs2(z2)".to_string();
    let code = cmd_selftest(&[("flipped".to_string(), flipped)], false).unwrap();
    assert_eq!(code, EXIT_FAIL);
}

#[test]
fn binary_reports_config_errors_with_exit_2() {
    let exe = env!("CARGO_BIN_EXE_plurisub");
    let out = Command::new(exe)
        .args(["verify", "no-such-domain"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no-such-domain"), "stderr: {stderr}");
}

#[test]
fn binary_verify_ball_round_trip() {
    let exe = env!("CARGO_BIN_EXE_plurisub");
    let dir = outdir("binary-ball");
    let out = Command::new(exe)
        .args(["verify", "ball", "--out"])
        .arg(&dir)
        .args(["--json"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(EXIT_PASS),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("machine-readable stdout");
    assert_eq!(stdout["command"], "verify");
    // stdout JSON matches the written report
    assert_eq!(stdout, read_report(&dir));
}

#[test]
fn config_file_round_trip() {
    let cfg = fixture("example-2-3-fixed").unwrap();
    let path = std::env::temp_dir().join(format!("plurisub-cfg-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let (name, loaded) = plurisub_cli::resolve_domain(&path.to_string_lossy()).unwrap();
    assert!(name.starts_with("plurisub-cfg"));
    loaded.validate().unwrap();
    assert_eq!(loaded.rho, cfg.rho);
}

#[test]
fn forced_parameters_reach_the_pipeline() {
    let mut cfg = fixture("example-2-3").unwrap();
    cfg.params.c = Some(0.0);
    cfg.params.k = Some(0.0);
    let out = outdir("verify-forced");
    let code = cmd_verify("example-2-3", &cfg, &out, false).unwrap();
    assert_eq!(code, EXIT_FAIL);
    let report = read_report(&out);
    assert_eq!(report["interior"]["C"].as_f64().unwrap(), 0.0);
    assert_eq!(report["interior"]["K"].as_f64().unwrap(), 0.0);
    assert!(!report["pass"].as_bool().unwrap());
}

#[test]
fn selftest_json_mode() {
    let mut cfg = fixture("ball").unwrap();
    // smaller sample keeps this test snappy; the suite itself is exercised
    // at full size by the selftest_passes test
    cfg.sampling.n_boundary = 64;
    let code = cmd_selftest(&[("ball".to_string(), cfg)], true).unwrap();
    assert_eq!(code, EXIT_PASS);
}

#[test]
fn binary_selftest_names_failed_invariants() {
    let exe = env!("CARGO_BIN_EXE_plurisub");
    let path = std::env::temp_dir().join(format!("plurisub-flip-{}.json", std::process::id()));
    let mut cfg = fixture("ball").unwrap();
    cfg.rho = "1-abs2(z1)-abs2(z2)".to_string();
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = Command::new(exe)
        .args(["selftest", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("boundary-psh") && stdout.contains("FAIL"),
        "stdout: {stdout}"
    );
}
