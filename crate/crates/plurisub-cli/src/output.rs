//! Report and CSV writers.

use plurisub_core::transforms::CollarSample;
use plurisub_core::verify::{EtaRow, ObstructionTable, VerificationReport};
use plurisub_core::Classification;
use std::fmt::Write as _;
use std::path::Path;

/// samples.csv rows: one per point.
pub const SAMPLES_HEADER: &str = "z1re,z1im,z2re,z2im,rho,dist,class,A_p,margin";

fn push_row(
    out: &mut String,
    p: plurisub_core::ComplexPoint2,
    rho: f64,
    dist: f64,
    class: Classification,
    a: Option<f64>,
    margin: f64,
) {
    let a_str = a.map(|v| v.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        p.z1.re, p.z1.im, p.z2.re, p.z2.im, rho, dist, class, a_str, margin
    );
}

/// CSV for a classification scan: boundary rows only.
pub fn samples_csv_from_scan(table: &ObstructionTable) -> String {
    let mut out = String::from(SAMPLES_HEADER);
    out.push('\n');
    for row in &table.rows {
        push_row(
            &mut out,
            row.point,
            row.rho,
            0.0,
            row.classification,
            row.obstruction,
            row.margin,
        );
    }
    out
}

/// CSV for a verification run: boundary rows followed by collar rows whose
/// margins come from the side reports.
pub fn samples_csv_for_verify(
    table: &ObstructionTable,
    rho_at: impl Fn(plurisub_core::ComplexPoint2) -> f64,
    collar_in: &[CollarSample],
    interior: &VerificationReport,
    collar_out: &[CollarSample],
    exterior: &VerificationReport,
) -> String {
    let mut out = samples_csv_from_scan(table);
    let classify_of = |idx: usize| -> (Classification, Option<f64>) {
        table
            .rows
            .get(idx)
            .map(|r| (r.classification, r.obstruction))
            .unwrap_or((Classification::Strict, None))
    };
    for (collar, report) in [(collar_in, interior), (collar_out, exterior)] {
        for (cs, &margin) in collar.iter().zip(report.margins.iter()) {
            let (class, a) = classify_of(cs.boundary_idx);
            push_row(&mut out, cs.q, rho_at(cs.q), cs.d, class, a, margin);
        }
    }
    out
}

/// df.csv: one row per exponent and side.
pub fn df_csv(rows: &[EtaRow]) -> String {
    let mut out = String::from("side,eta,delta,epsilon,C,K,pass,min_margin\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.side, r.eta, r.delta, r.epsilon, r.c, r.k, r.pass, r.min_margin
        );
    }
    out
}

pub fn write_outputs(
    out_dir: &Path,
    report: &serde_json::Value,
    samples_csv: Option<&str>,
    df_csv: Option<&str>,
) -> std::io::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let pretty = serde_json::to_string_pretty(report).expect("report serializes");
    std::fs::write(out_dir.join("report.json"), pretty + "\n")?;
    if let Some(csv) = samples_csv {
        std::fs::write(out_dir.join("samples.csv"), csv)?;
    }
    if let Some(csv) = df_csv {
        std::fs::write(out_dir.join("df.csv"), csv)?;
    }
    Ok(())
}
