//! Domain configuration: a single JSON document, with command-line flags
//! overriding individual fields.

use anyhow::{bail, Context};
use plurisub_core::verify::PipelineConfig;
use plurisub_core::{parse, Box4, ScalarField};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_boundary_tol")]
    pub boundary_tol: f64,
    #[serde(default = "default_tau_weak")]
    pub tau_weak: f64,
    #[serde(default = "default_psd_tol")]
    pub psd_tol: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_boundary_tol() -> f64 {
    1e-10
}
fn default_tau_weak() -> f64 {
    1e-8
}
fn default_psd_tol() -> f64 {
    1e-9
}
fn default_floor() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            boundary_tol: default_boundary_tol(),
            tau_weak: default_tau_weak(),
            psd_tol: default_psd_tol(),
            floor: default_floor(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "default_n_boundary")]
    pub n_boundary: usize,
    /// Collar depths; empty means log-spaced defaults scaled by the box.
    #[serde(default)]
    pub depths: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_n_boundary() -> usize {
    400
}
fn default_seed() -> u64 {
    7
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            n_boundary: default_n_boundary(),
            depths: Vec::new(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(rename = "K", default)]
    pub k: Option<f64>,
    #[serde(rename = "C", default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    #[serde(default = "default_region_n")]
    pub n: usize,
    /// Keep region points with rho in this band (interior side).
    #[serde(default)]
    pub band_interior: Option<[f64; 2]>,
    #[serde(default)]
    pub band_exterior: Option<[f64; 2]>,
}

fn default_region_n() -> usize {
    600
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    /// Defining function as an expression in z1, z2.
    pub rho: String,
    /// Four intervals: re z1, im z1, re z2, im z2.
    #[serde(rename = "box")]
    pub bbox: [[f64; 2]; 4],
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub eta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_grid_exterior: Option<Vec<f64>>,
}

impl DomainConfig {
    /// Parse the defining function and validate the configuration.
    pub fn validate(&self) -> anyhow::Result<ScalarField> {
        let rho = parse(&self.rho)
            .map_err(|e| anyhow::anyhow!("invalid expression: {e}"))
            .context("field 'rho'")?;
        let bbox = Box4::new(self.bbox);
        if bbox.is_empty() {
            bail!("field 'box': every interval needs lo < hi");
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("boundary_tol", t.boundary_tol),
            ("tau_weak", t.tau_weak),
            ("psd_tol", t.psd_tol),
            ("floor", t.floor),
        ] {
            if !v.is_finite() || v <= 0.0 {
                bail!("field 'tolerances.{name}': must be positive, got {v}");
            }
        }
        if self.sampling.n_boundary == 0 {
            bail!("field 'sampling.n_boundary': must be positive");
        }
        for &d in &self.sampling.depths {
            if !d.is_finite() || d <= 0.0 {
                bail!("field 'sampling.depths': entries must be positive, got {d}");
            }
        }
        if let Some(e) = self.params.epsilon {
            if !e.is_finite() || e <= 0.0 {
                bail!("field 'params.epsilon': must be positive, got {e}");
            }
        }
        Ok(rho)
    }

    pub fn bbox(&self) -> Box4 {
        Box4::new(self.bbox)
    }

    /// Assemble the engine configuration, flags already folded in.
    pub fn pipeline_config(&self) -> PipelineConfig {
        let region = self.region.clone().unwrap_or_default();
        PipelineConfig {
            boundary_tol: self.tolerances.boundary_tol,
            tau_weak: self.tolerances.tau_weak,
            psd_tol: self.tolerances.psd_tol,
            floor: self.tolerances.floor,
            n_boundary: self.sampling.n_boundary,
            depths: self.sampling.depths.clone(),
            seed: self.sampling.seed,
            epsilon: self.params.epsilon.unwrap_or(0.1),
            forced_c: self.params.c,
            forced_k: self.params.k,
            eta_grid_interior: self
                .eta_grid
                .clone()
                .unwrap_or_else(|| vec![0.5, 0.75, 0.9, 0.95, 0.99]),
            eta_grid_exterior: self
                .eta_grid_exterior
                .clone()
                .unwrap_or_else(|| vec![1.5, 2.0]),
            region_n: if region.n == 0 {
                default_region_n()
            } else {
                region.n
            },
            region_band_interior: region.band_interior,
            region_band_exterior: region.band_exterior,
            projection_max_iter: 200,
        }
    }
}

/// Flag overrides applied on top of a config file (flag > file > default).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut DomainConfig) {
        if let Some(seed) = self.seed {
            cfg.sampling.seed = seed;
        }
        if let Some(eps) = self.epsilon {
            cfg.params.epsilon = Some(eps);
        }
        if let Some(eta) = self.eta {
            cfg.params.eta = Some(eta);
            // the override collapses the sweep on the side the exponent is
            // valid for and leaves the other side alone
            if eta < 1.0 {
                cfg.eta_grid = Some(vec![eta]);
            } else if eta > 1.0 {
                cfg.eta_grid_exterior = Some(vec![eta]);
            }
        }
    }
}
