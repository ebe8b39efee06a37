//! Command-line driver: domain configs, built-in fixtures, and the four
//! subcommands (`classify`, `verify`, `df-exponent`, `selftest`).
//!
//! The binary in `main.rs` is a thin argument parser around
//! [`commands`]; integration tests call the same functions.

pub mod commands;
pub mod config;
pub mod fixtures;
pub mod output;

use anyhow::bail;
use config::DomainConfig;
use std::path::Path;

/// Resolve a domain argument: a built-in fixture name or a path to a JSON
/// config document.
pub fn resolve_domain(arg: &str) -> anyhow::Result<(String, DomainConfig)> {
    if let Some(cfg) = fixtures::fixture(arg) {
        return Ok((arg.to_string(), cfg));
    }
    let path = Path::new(arg);
    if !path.exists() {
        bail!(
            "'{arg}' is neither a built-in domain ({}) nor an existing config file",
            fixtures::FIXTURE_NAMES.join(", ")
        );
    }
    let text = std::fs::read_to_string(path)?;
    let cfg: DomainConfig = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((name, cfg))
}
