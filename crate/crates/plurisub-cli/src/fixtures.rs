//! Built-in domains, compiled into the binary so runs need no external
//! files.
//!
//! * `ball` - the unit ball, strictly pseudoconvex everywhere; every check
//!   passes without modification.
//! * `example-2-3` - a domain whose boundary is plurisubharmonically defined
//!   but carries a weakly pseudoconvex curve through the origin on which the
//!   tangential Levi eigenvalue decreases inward (obstruction value 1/2);
//!   the undamped Hessian bound fails on the normal line of the origin.
//! * `example-2-3-fixed` - the repaired defining function of the same kind
//!   of domain, plurisubharmonic everywhere.

use crate::config::{DomainConfig, Region, Sampling, Tolerances};

pub const FIXTURE_NAMES: [&str; 3] = ["ball", "example-2-3", "example-2-3-fixed"];

pub fn fixture(name: &str) -> Option<DomainConfig> {
    match name {
        "ball" => Some(ball()),
        "example-2-3" => Some(example_2_3()),
        "example-2-3-fixed" => Some(example_2_3_fixed()),
        _ => None,
    }
}

fn ball() -> DomainConfig {
    DomainConfig {
        rho: "abs2(z1)+abs2(z2)-1".to_string(),
        bbox: [[-1.2, 1.2], [-1.2, 1.2], [-1.2, 1.2], [-1.2, 1.2]],
        tolerances: Tolerances::default(),
        sampling: Sampling {
            n_boundary: 400,
            depths: vec![1e-4, 1e-3, 1e-2, 5e-2, 1e-1],
            seed: 20260809,
        },
        params: crate::config::Params {
            epsilon: Some(0.1),
            ..Default::default()
        },
        region: Some(Region {
            n: 1000,
            // |z| <= 0.99 inside, 1 < |z| <= 1.1 outside
            band_interior: Some([-1.0, -0.0199]),
            band_exterior: Some([1e-4, 0.21]),
        }),
        eta_grid: None,
        eta_grid_exterior: None,
    }
}

fn example_2_3() -> DomainConfig {
    DomainConfig {
        rho: "re(z2) + abs2(z2) + re(z2)*abs2(z1) + abs2(z1)*abs2(z2) + abs2(z1)^2 + abs2(z1)^3"
            .to_string(),
        // a patch around the origin, thin in im z2 so the visible weak set
        // hugs the normal line of the origin
        bbox: [
            [-0.25, 0.25],
            [-0.25, 0.25],
            [-0.18, 0.02],
            [-0.0075, 0.0075],
        ],
        tolerances: Tolerances::default(),
        sampling: Sampling {
            n_boundary: 1000,
            depths: vec![1e-5, 5.6234e-5, 3.1623e-4, 1.7783e-3, 1e-2],
            seed: 20260809,
        },
        params: crate::config::Params {
            epsilon: Some(0.1),
            ..Default::default()
        },
        region: Some(Region {
            n: 600,
            band_interior: Some([-0.02, -1e-4]),
            band_exterior: Some([1e-4, 0.02]),
        }),
        eta_grid: None,
        eta_grid_exterior: None,
    }
}

fn example_2_3_fixed() -> DomainConfig {
    DomainConfig {
        rho: "re(z2) + abs2(z2) + abs2(z1)^2".to_string(),
        bbox: [[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]],
        tolerances: Tolerances::default(),
        sampling: Sampling {
            n_boundary: 1000,
            depths: vec![1e-5, 5.6234e-5, 3.1623e-4, 1.7783e-3, 1e-2],
            seed: 20260809,
        },
        params: crate::config::Params {
            epsilon: Some(0.1),
            ..Default::default()
        },
        region: Some(Region {
            n: 1000,
            band_interior: Some([-0.05, -1e-4]),
            band_exterior: Some([1e-4, 0.05]),
        }),
        eta_grid: None,
        eta_grid_exterior: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_validate() {
        for name in FIXTURE_NAMES {
            let cfg = fixture(name).unwrap();
            cfg.validate()
                .unwrap_or_else(|e| panic!("fixture {name}: {e}"));
        }
    }

    #[test]
    fn unknown_fixture_is_none() {
        assert!(fixture("torus").is_none());
    }
}
