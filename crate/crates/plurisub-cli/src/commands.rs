//! The four subcommands as library functions, so tests exercise exactly
//! what the binary runs.

use crate::config::DomainConfig;
use crate::output;
use anyhow::Context;
use plurisub_core::selftest;
use plurisub_core::verify::{obstruction_scan, Pipeline, VerifyError};
use plurisub_core::Side;
use serde_json::json;
use std::path::Path;

/// Exit codes: 0 pass, 1 verification failure, 2 input or config error.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

// engine-phase failures (undersampling, non-convergence, wrong side) are
// verification failures; malformed input never reaches the engine
fn exit_code_for(_e: &VerifyError) -> i32 {
    EXIT_FAIL
}

/// Classify boundary samples and tabulate obstruction values.
pub fn cmd_classify(
    name: &str,
    cfg: &DomainConfig,
    out_dir: &Path,
    json_stdout: bool,
) -> anyhow::Result<i32> {
    let rho = cfg.validate()?;
    let pipeline = Pipeline::new(&rho, cfg.bbox(), cfg.pipeline_config());
    let prep = match pipeline.prepare() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("classify: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let table = obstruction_scan(
        pipeline.projector(),
        &prep.boundary[..prep.n_raw_boundary],
        &prep.weak,
    )
    .map_err(|e| anyhow::anyhow!("scan failed: {e}"))?;
    let report = json!({
        "command": "classify",
        "domain": name,
        "n_samples": table.rows.len(),
        "n_boundary": prep.n_raw_boundary,
        "weak_count": table.weak_count,
        "max_A": table.max_obstruction,
        "c3": prep.estimates.c3,
        "c4": prep.estimates.c4,
        "pass": true,
    });
    let csv = output::samples_csv_from_scan(&table);
    output::write_outputs(out_dir, &report, Some(&csv), None).context("writing outputs")?;
    emit(&report, json_stdout, || {
        println!(
            "classify {name}: {} samples, {} weak, max obstruction {}",
            table.rows.len(),
            table.weak_count,
            table
                .max_obstruction
                .map(|v| v.to_string())
                .unwrap_or_else(|| "n/a".into())
        );
    });
    Ok(EXIT_PASS)
}

/// Verify the interior and exterior Hessian lower bounds.
pub fn cmd_verify(
    name: &str,
    cfg: &DomainConfig,
    out_dir: &Path,
    json_stdout: bool,
) -> anyhow::Result<i32> {
    let rho = cfg.validate()?;
    let pipeline = Pipeline::new(&rho, cfg.bbox(), cfg.pipeline_config());
    let outcome = (|| -> Result<_, VerifyError> {
        let prep = pipeline.prepare()?;
        let outcome = pipeline.verify(&prep)?;
        Ok((prep, outcome))
    })();
    let (prep, outcome) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("verify: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let table = obstruction_scan(
        pipeline.projector(),
        &prep.boundary[..prep.n_raw_boundary],
        &prep.weak,
    )
    .map_err(|e| anyhow::anyhow!("scan failed: {e}"))?;
    let report = json!({
        "command": "verify",
        "domain": name,
        "pass": outcome.pass,
        "epsilon": pipeline.cfg.epsilon,
        "estimates": prep.estimates,
        "weak_count": prep.weak.len(),
        "depths": prep.depths,
        "interior": {
            "C": outcome.interior.c,
            "K": outcome.interior.k,
            "report": outcome.interior.report,
        },
        "exterior": {
            "C": outcome.exterior.c,
            "K": outcome.exterior.k,
            "report": outcome.exterior.report,
        },
    });
    let geom = pipeline.geometry();
    let csv = output::samples_csv_for_verify(
        &table,
        |q| geom.rho_at(q).unwrap_or(f64::NAN),
        &prep.collar_in,
        &outcome.interior.report,
        &prep.collar_out,
        &outcome.exterior.report,
    );
    output::write_outputs(out_dir, &report, Some(&csv), None).context("writing outputs")?;
    emit(&report, json_stdout, || {
        let status = if outcome.pass { "pass" } else { "FAIL" };
        println!(
            "verify {name}: {status} (C_in = {}, K_in = {}, min margins {:.3e} / {:.3e})",
            outcome.interior.c,
            outcome.interior.k,
            outcome.interior.report.min_margin,
            outcome.exterior.report.min_margin
        );
        for (label, side) in [("interior", &outcome.interior), ("exterior", &outcome.exterior)] {
            if let (false, Some(w)) = (side.report.pass, side.report.argmin) {
                println!(
                    "  {label} witness: ({}, {}i, {}, {}i)",
                    w.z1re, w.z1im, w.z2re, w.z2im
                );
            }
        }
    });
    Ok(if outcome.pass { EXIT_PASS } else { EXIT_FAIL })
}

/// Sweep the exhaustion exponent grids on both sides.
pub fn cmd_df_exponent(
    name: &str,
    cfg: &DomainConfig,
    out_dir: &Path,
    json_stdout: bool,
) -> anyhow::Result<i32> {
    let rho = cfg.validate()?;
    let pcfg = cfg.pipeline_config();
    let grid_in = pcfg.eta_grid_interior.clone();
    let grid_out = pcfg.eta_grid_exterior.clone();
    let pipeline = Pipeline::new(&rho, cfg.bbox(), pcfg);
    let result = (|| -> Result<_, VerifyError> {
        let prep = pipeline.prepare()?;
        let interior = pipeline.df_exponent(&prep, Side::Interior, &grid_in)?;
        let exterior = pipeline.df_exponent(&prep, Side::Exterior, &grid_out)?;
        Ok((interior, exterior))
    })();
    let (interior, exterior) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("df-exponent: {e}");
            return Ok(exit_code_for(&e));
        }
    };
    let mut rows = interior.rows.clone();
    rows.extend(exterior.rows.iter().cloned());
    let report = json!({
        "command": "df-exponent",
        "domain": name,
        "best_eta_interior": interior.best_eta,
        "best_eta_exterior": exterior.best_eta,
        "per_eta": rows,
        "pass": interior.best_eta.is_some(),
    });
    let csv = output::df_csv(&rows);
    output::write_outputs(out_dir, &report, None, Some(&csv)).context("writing outputs")?;
    emit(&report, json_stdout, || {
        println!(
            "df-exponent {name}: interior eta {} / exterior eta {}",
            interior
                .best_eta
                .map(|v| v.to_string())
                .unwrap_or_else(|| "none".into()),
            exterior
                .best_eta
                .map(|v| v.to_string())
                .unwrap_or_else(|| "none".into())
        );
        for row in &rows {
            println!(
                "  {} eta = {:<6} delta = {:.4e} C = {:.4} K = {:<6} min margin = {:+.3e} {}",
                row.side,
                row.eta,
                row.delta,
                row.c,
                row.k,
                row.min_margin,
                if row.pass { "pass" } else { "FAIL" }
            );
        }
    });
    Ok(if interior.best_eta.is_some() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

/// Run the invariant suite over the given domains.
pub fn cmd_selftest(domains: &[(String, DomainConfig)], json_stdout: bool) -> anyhow::Result<i32> {
    let mut all = Vec::new();
    let mut ok = true;
    for (name, cfg) in domains {
        let rho = cfg.validate()?;
        let results = selftest::run_suite(&rho, &cfg.bbox(), cfg.sampling.seed);
        for r in &results {
            if !json_stdout {
                println!(
                    "{name}: {:<26} {} ({})",
                    r.name,
                    if r.pass { "pass" } else { "FAIL" },
                    r.detail
                );
            }
            ok &= r.pass;
        }
        all.push(json!({ "domain": name, "results": results }));
    }
    if json_stdout {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "selftest": all, "pass": ok }))?
        );
    }
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn emit(report: &serde_json::Value, json_stdout: bool, human: impl FnOnce()) {
    if json_stdout {
        println!(
            "{}",
            serde_json::to_string_pretty(report).expect("report serializes")
        );
    } else {
        human();
    }
}
