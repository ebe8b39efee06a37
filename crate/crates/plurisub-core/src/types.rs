//! Shared geometric value types.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of C^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl ComplexPoint2 {
    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        ComplexPoint2 { z1, z2 }
    }

    pub fn from_re_im(z1re: f64, z1im: f64, z2re: f64, z2im: f64) -> Self {
        ComplexPoint2::new(Complex64::new(z1re, z1im), Complex64::new(z2re, z2im))
    }

    pub fn is_finite(&self) -> bool {
        self.z1.re.is_finite()
            && self.z1.im.is_finite()
            && self.z2.re.is_finite()
            && self.z2.im.is_finite()
    }

    /// Euclidean norm of the point as a vector in C^2.
    pub fn norm(&self) -> f64 {
        (self.z1.norm_sqr() + self.z2.norm_sqr()).sqrt()
    }

    pub fn distance(&self, other: &ComplexPoint2) -> f64 {
        ((self.z1 - other.z1).norm_sqr() + (self.z2 - other.z2).norm_sqr()).sqrt()
    }
}

impl std::fmt::Display for ComplexPoint2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}{:+}i, {}{:+}i)",
            self.z1.re, self.z1.im, self.z2.re, self.z2.im
        )
    }
}

/// A (1,0) tangent vector at a point, identified with a pair of components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVector2(pub [Complex64; 2]);

/// A (1,0) form (for instance a Wirtinger gradient), stored by components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexCovector2(pub [Complex64; 2]);

impl ComplexVector2 {
    pub fn zero() -> Self {
        ComplexVector2([Complex64::new(0.0, 0.0); 2])
    }

    /// Hermitian inner product `<self, other> = sum_j self_j conj(other_j)`.
    pub fn dot(&self, other: &ComplexVector2) -> Complex64 {
        self.0[0] * other.0[0].conj() + self.0[1] * other.0[1].conj()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> ComplexVector2 {
        ComplexVector2([self.0[0] * s, self.0[1] * s])
    }

    pub fn add(&self, other: &ComplexVector2) -> ComplexVector2 {
        ComplexVector2([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }

    pub fn sub(&self, other: &ComplexVector2) -> ComplexVector2 {
        ComplexVector2([self.0[0] - other.0[0], self.0[1] - other.0[1]])
    }
}

impl ComplexCovector2 {
    /// Contraction `<form, xi> = sum_j form_j xi_j`.
    pub fn pair(&self, xi: &ComplexVector2) -> Complex64 {
        self.0[0] * xi.0[0] + self.0[1] * xi.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// A 2x2 Hermitian form, stored by its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianForm2 {
    pub h11: f64,
    pub h12: Complex64,
    pub h22: f64,
}

impl HermitianForm2 {
    pub fn identity() -> Self {
        HermitianForm2 {
            h11: 1.0,
            h12: Complex64::new(0.0, 0.0),
            h22: 1.0,
        }
    }

    pub fn zero() -> Self {
        HermitianForm2 {
            h11: 0.0,
            h12: Complex64::new(0.0, 0.0),
            h22: 0.0,
        }
    }

    /// The rank-one form `xi -> |<g, xi>|^2` built from a (1,0) form `g`.
    pub fn rank_one(g: &ComplexCovector2) -> Self {
        HermitianForm2 {
            h11: g.0[0].norm_sqr(),
            h12: g.0[0] * g.0[1].conj(),
            h22: g.0[1].norm_sqr(),
        }
    }

    /// Evaluate the form on a vector: `sum_jk h_jk xi_j conj(xi_k)`.
    pub fn apply(&self, xi: &ComplexVector2) -> f64 {
        let cross = self.h12 * xi.0[0] * xi.0[1].conj();
        self.h11 * xi.0[0].norm_sqr() + self.h22 * xi.0[1].norm_sqr() + 2.0 * cross.re
    }

    pub fn add(&self, other: &HermitianForm2) -> HermitianForm2 {
        HermitianForm2 {
            h11: self.h11 + other.h11,
            h12: self.h12 + other.h12,
            h22: self.h22 + other.h22,
        }
    }

    pub fn scale(&self, s: f64) -> HermitianForm2 {
        HermitianForm2 {
            h11: s * self.h11,
            h12: s * self.h12,
            h22: s * self.h22,
        }
    }

    /// Add `s` times the identity.
    pub fn shift(&self, s: f64) -> HermitianForm2 {
        HermitianForm2 {
            h11: self.h11 + s,
            h12: self.h12,
            h22: self.h22 + s,
        }
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12.norm_sqr()
    }

    pub fn frobenius(&self) -> f64 {
        (self.h11 * self.h11 + self.h22 * self.h22 + 2.0 * self.h12.norm_sqr()).sqrt()
    }

    /// Smallest eigenvalue from the trace and determinant.
    ///
    /// When the largest eigenvalue is positive the smallest is computed as
    /// det/lambda_max, which avoids cancellation for nearly singular
    /// positive forms.
    pub fn min_eigenvalue(&self) -> f64 {
        let mid = 0.5 * (self.h11 + self.h22);
        let half_gap = 0.5 * (self.h11 - self.h22);
        let disc = (half_gap * half_gap + self.h12.norm_sqr()).sqrt();
        let lmax = mid + disc;
        if lmax > 0.0 {
            self.det() / lmax
        } else {
            mid - disc
        }
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let mid = 0.5 * (self.h11 + self.h22);
        let half_gap = 0.5 * (self.h11 - self.h22);
        mid + (half_gap * half_gap + self.h12.norm_sqr()).sqrt()
    }

    /// Dimensionless scale used to normalize tolerances.
    pub fn tolerance_scale(&self) -> f64 {
        self.frobenius().max(1.0)
    }
}

/// Strict versus weak pseudoconvexity of a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Strict,
    Weak,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Strict => write!(f, "strict"),
            Classification::Weak => write!(f, "weak"),
        }
    }
}

/// Which side of the boundary a construction lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Interior,
    Exterior,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Interior => write!(f, "interior"),
            Side::Exterior => write!(f, "exterior"),
        }
    }
}

/// An axis-aligned box in the four real coordinates (re z1, im z1, re z2, im z2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box4(pub [[f64; 2]; 4]);

impl Box4 {
    pub fn new(intervals: [[f64; 2]; 4]) -> Self {
        Box4(intervals)
    }

    pub fn cube(half_width: f64) -> Self {
        Box4([[-half_width, half_width]; 4])
    }

    pub fn contains(&self, q: &ComplexPoint2) -> bool {
        let coords = [q.z1.re, q.z1.im, q.z2.re, q.z2.im];
        coords
            .iter()
            .zip(self.0.iter())
            .all(|(x, [lo, hi])| *x >= *lo && *x <= *hi)
    }

    pub fn point_at(&self, t: [f64; 4]) -> ComplexPoint2 {
        let c: Vec<f64> = self
            .0
            .iter()
            .zip(t.iter())
            .map(|([lo, hi], u)| lo + (hi - lo) * u)
            .collect();
        ComplexPoint2::from_re_im(c[0], c[1], c[2], c[3])
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.0
            .iter()
            .map(|[lo, hi]| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(|[lo, hi]| hi <= lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_eigenvalue_of_identity() {
        assert_eq!(HermitianForm2::identity().min_eigenvalue(), 1.0);
    }

    #[test]
    fn min_eigenvalue_matches_quadratic_form() {
        let h = HermitianForm2 {
            h11: 2.0,
            h12: Complex64::new(0.5, -0.3),
            h22: 0.7,
        };
        let lmin = h.min_eigenvalue();
        let lmax = h.max_eigenvalue();
        // scan a few directions; the form must stay within the eigenvalue range
        for k in 0..32 {
            let t = k as f64 / 32.0 * std::f64::consts::TAU;
            let xi = ComplexVector2([
                Complex64::new(t.cos(), 0.2 * t.sin()),
                Complex64::new(t.sin(), -0.1),
            ]);
            let value = h.apply(&xi) / xi.norm_sqr();
            assert!(value >= lmin - 1e-12 && value <= lmax + 1e-12);
        }
    }

    #[test]
    fn rank_one_applies_as_pairing_modulus() {
        let g = ComplexCovector2([Complex64::new(0.3, 1.0), Complex64::new(-0.2, 0.4)]);
        let xi = ComplexVector2([Complex64::new(1.0, -0.5), Complex64::new(0.7, 0.1)]);
        let direct = g.pair(&xi).norm_sqr();
        let through_form = HermitianForm2::rank_one(&g).apply(&xi);
        assert!((direct - through_form).abs() < 1e-12 * (1.0 + direct));
    }
}
