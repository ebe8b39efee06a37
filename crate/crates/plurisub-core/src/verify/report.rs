//! Verification reports and their serialized form.

use crate::types::ComplexPoint2;
use serde::{Deserialize, Serialize};

/// Parameters a check ran with; unused slots stay empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c4: Option<f64>,
}

/// The witness point of the smallest margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArgminPoint {
    pub z1re: f64,
    pub z1im: f64,
    pub z2re: f64,
    pub z2im: f64,
}

impl From<ComplexPoint2> for ArgminPoint {
    fn from(p: ComplexPoint2) -> Self {
        ArgminPoint {
            z1re: p.z1.re,
            z1im: p.z1.im,
            z2re: p.z2.re,
            z2im: p.z2.im,
        }
    }
}

impl ArgminPoint {
    pub fn to_point(self) -> ComplexPoint2 {
        ComplexPoint2::from_re_im(self.z1re, self.z1im, self.z2re, self.z2im)
    }
}

/// One row of a per-exponent sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub side: crate::types::Side,
    pub eta: f64,
    pub delta: f64,
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub pass: bool,
    pub min_margin: f64,
}

/// Aggregated result of one inequality check over a sample set.
///
/// `pass` holds exactly when every per-sample margin stayed at or above the
/// negated tolerance (scaled per point where the check defines a scale).
/// The full margin vector is kept in memory for CSV dumps but only the
/// summary serializes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: ReportParams,
    pub n_samples: usize,
    pub min_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin: Option<ArgminPoint>,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_eta: Option<Vec<EtaRow>>,
    pub wall_time_ms: f64,
    #[serde(skip)]
    pub margins: Vec<f64>,
}

impl VerificationReport {
    pub fn from_margins(
        check: impl Into<String>,
        params: ReportParams,
        tolerance: f64,
        points: &[ComplexPoint2],
        margins: Vec<f64>,
        scaled_ok: &[bool],
        wall_time_ms: f64,
    ) -> Self {
        debug_assert_eq!(points.len(), margins.len());
        let mut min_margin = f64::INFINITY;
        let mut argmin = None;
        for (i, &m) in margins.iter().enumerate() {
            if m < min_margin {
                min_margin = m;
                argmin = Some(points[i].into());
            }
        }
        if margins.is_empty() {
            min_margin = f64::NAN;
        }
        let pass = !margins.is_empty() && scaled_ok.iter().all(|&ok| ok);
        VerificationReport {
            check: check.into(),
            params,
            n_samples: margins.len(),
            min_margin,
            argmin,
            pass,
            tolerance,
            per_eta: None,
            wall_time_ms,
            margins,
        }
    }
}
