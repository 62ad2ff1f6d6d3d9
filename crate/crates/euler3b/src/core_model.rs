//! Masses, phase-space states and chart boxes shared by every module.
//!
//! Units: m0 = 1 by default and the gravitational constant is absorbed.

use nalgebra::Vector3;

use crate::error::{domain, Error, Exclusion, Result};

pub type Vec3 = Vector3<f64>;

/// Default floor for [`CartesianState::validate`].
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-12;

/// Bare masses m0, m' = μ m0, m = εμ m0 and the derived reduced masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassModel {
    m0: f64,
    mu: f64,
    eps: f64,
}

impl MassModel {
    pub fn new(m0: f64, mu: f64, eps: f64) -> Result<Self> {
        if !(m0 > 0.0) || !m0.is_finite() {
            return domain(format!("m0 must be positive, got {m0}"));
        }
        if !(mu >= 0.0) || !(eps >= 0.0) {
            return domain(format!("mu and eps must be non-negative, got mu={mu}, eps={eps}"));
        }
        Ok(Self { m0, mu, eps })
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    /// Same bodies with a different ε.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.m0, self.mu, eps)
    }
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.m0, mu, self.eps)
    }

    /// m' = μ m0.
    pub fn outer_mass(&self) -> f64 {
        self.mu * self.m0
    }
    /// m = εμ m0.
    pub fn inner_mass(&self) -> f64 {
        self.eps * self.mu * self.m0
    }
    /// 𝗆' = m0 / (1 + μ).
    pub fn reduced_outer(&self) -> f64 {
        self.m0 / (1.0 + self.mu)
    }
    /// 𝗆 = m0 / (1 + εμ).
    pub fn reduced_inner(&self) -> f64 {
        self.m0 / (1.0 + self.eps * self.mu)
    }
    /// ℳ' = m0 (1 + μ).
    pub fn grav_outer(&self) -> f64 {
        self.m0 * (1.0 + self.mu)
    }
    /// ℳ = m0 (1 + εμ).
    pub fn grav_inner(&self) -> f64 {
        self.m0 * (1.0 + self.eps * self.mu)
    }
    /// 𝗆²ℳ, the Kepler "parameter" constant of the inner pair.
    pub fn kepler_k(&self) -> f64 {
        let m = self.reduced_inner();
        m * m * self.grav_inner()
    }
}

/// Convenience wrapper matching the usual entry point.
pub fn derive_reduced_masses(m0: f64, mu: f64, eps: f64) -> Result<MassModel> {
    MassModel::new(m0, mu, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Planar,
    Spatial,
}

/// Heliocentric phase point (y', y, x', x) in the rescaled variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub y_prime: Vec3,
    pub y: Vec3,
    pub x_prime: Vec3,
    pub x: Vec3,
    pub dim: Dim,
}

impl CartesianState {
    pub fn planar(y_prime: [f64; 2], y: [f64; 2], x_prime: [f64; 2], x: [f64; 2]) -> Self {
        let v = |a: [f64; 2]| Vec3::new(a[0], a[1], 0.0);
        Self {
            y_prime: v(y_prime),
            y: v(y),
            x_prime: v(x_prime),
            x: v(x),
            dim: Dim::Planar,
        }
    }

    pub fn spatial(y_prime: Vec3, y: Vec3, x_prime: Vec3, x: Vec3) -> Self {
        Self { y_prime, y, x_prime, x, dim: Dim::Spatial }
    }

    /// Flat layout (x', x, y', y); planar states use 8 entries, spatial 12.
    pub fn to_flat(&self) -> Vec<f64> {
        let d = self.dim_len();
        let mut out = Vec::with_capacity(4 * d);
        for v in [&self.x_prime, &self.x, &self.y_prime, &self.y] {
            out.extend_from_slice(&v.as_slice()[..d]);
        }
        out
    }

    pub fn from_flat(z: &[f64], dim: Dim) -> Self {
        let d = match dim {
            Dim::Planar => 2,
            Dim::Spatial => 3,
        };
        assert_eq!(z.len(), 4 * d, "flat state length");
        let get = |i: usize| {
            let mut v = Vec3::zeros();
            for c in 0..d {
                v[c] = z[i * d + c];
            }
            v
        };
        Self { x_prime: get(0), x: get(1), y_prime: get(2), y: get(3), dim }
    }

    pub fn dim_len(&self) -> usize {
        match self.dim {
            Dim::Planar => 2,
            Dim::Spatial => 3,
        }
    }

    /// Rejects x = 0, x' = 0 and x = x' within `min_separation`, and
    /// planar states with non-zero third components.
    pub fn validate(&self, min_separation: f64) -> Result<()> {
        if self.dim == Dim::Planar
            && [self.x, self.x_prime, self.y, self.y_prime].iter().any(|v| v[2] != 0.0)
        {
            return domain("planar state has a non-zero third component");
        }
        if self.x.norm() <= min_separation {
            return Err(Error::Singularity(Exclusion::InnerAtOrigin));
        }
        if self.x_prime.norm() <= min_separation {
            return Err(Error::Singularity(Exclusion::OuterAtOrigin));
        }
        if (self.x - self.x_prime).norm() <= min_separation {
            return Err(Error::Singularity(Exclusion::InnerAtOuter));
        }
        Ok(())
    }

    /// Smallest of |x|, |x'|, |x - x'|.
    pub fn min_separation(&self) -> f64 {
        self.x.norm().min(self.x_prime.norm()).min((self.x - self.x_prime).norm())
    }
}

pub fn validate_state(s: &CartesianState) -> Result<()> {
    s.validate(DEFAULT_MIN_SEPARATION)
}

/// Analyticity widths of a complex chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Widths {
    /// y-width
    pub r: f64,
    /// I-width
    pub rho: f64,
    /// x-width
    pub xi: f64,
    /// angle strip
    pub s: f64,
    /// (p, q) polydisk radius
    pub delta: f64,
}

impl Widths {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r", self.r),
            ("rho", self.rho),
            ("xi", self.xi),
            ("s", self.s),
            ("delta", self.delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("width {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// A chart for series in (I, φ, y, x, p, q): centers I0, y0, the real
/// x-interval [-x_range, x_range], and complex widths around them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub i_center: Vec<f64>,
    pub y_center: f64,
    pub x_range: f64,
    pub widths: Widths,
}

impl ChartBox {
    pub fn new(i_center: Vec<f64>, y_center: f64, x_range: f64, widths: Widths) -> Result<Self> {
        widths.validate()?;
        if !(x_range >= 0.0) {
            return domain(format!("x_range must be non-negative, got {x_range}"));
        }
        Ok(Self { i_center, y_center, x_range, widths })
    }

    /// sup |x| on the complex x-domain.
    pub fn x_sup(&self) -> f64 {
        self.x_range + self.widths.xi
    }

    /// Same center and x-interval; widths may differ.
    pub fn same_center(&self, other: &ChartBox) -> bool {
        self.i_center == other.i_center
            && self.y_center == other.y_center
            && self.x_range == other.x_range
    }

    pub fn with_widths(&self, widths: Widths) -> Self {
        Self { widths, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_masses() {
        let m = derive_reduced_masses(1.0, 0.0, 0.0).unwrap();
        assert_eq!(m.reduced_outer(), 1.0);
        assert_eq!(m.reduced_inner(), 1.0);
        assert_eq!(m.grav_outer(), 1.0);
        assert_eq!(m.grav_inner(), 1.0);
    }

    #[test]
    fn substituted_masses() {
        let m = derive_reduced_masses(1.0, 1e-3, 1e-4).unwrap();
        assert!((m.reduced_outer() - 1.0 / 1.001).abs() < 1e-16);
        assert!((m.grav_outer() - 1.001).abs() < 1e-16);
        assert!((m.reduced_inner() - 1.0 / (1.0 + 1e-7)).abs() < 1e-16);
        assert!((m.grav_inner() - (1.0 + 1e-7)).abs() < 1e-16);
    }

    #[test]
    fn rejects_bad_m0() {
        assert!(derive_reduced_masses(0.0, 0.1, 0.1).is_err());
        assert!(derive_reduced_masses(-1.0, 0.1, 0.1).is_err());
        assert!(derive_reduced_masses(1.0, -0.1, 0.1).is_err());
    }

    #[test]
    fn exclusions() {
        let s = CartesianState::planar([0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 0.0]);
        assert!(matches!(validate_state(&s), Err(Error::Singularity(Exclusion::InnerAtOuter))));
        let s = CartesianState::planar([0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, 0.0]);
        assert!(matches!(validate_state(&s), Err(Error::Singularity(Exclusion::InnerAtOrigin))));
        let s = CartesianState::planar([0.0, 0.0], [0.0, 1.0], [0.0, 0.0], [1.0, 0.0]);
        assert!(matches!(validate_state(&s), Err(Error::Singularity(Exclusion::OuterAtOrigin))));
        let s = CartesianState::planar([0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [1.0, 0.0]);
        assert!(validate_state(&s).is_ok());
    }

    #[test]
    fn flat_round_trip() {
        let s = CartesianState::planar([1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]);
        let z = s.to_flat();
        assert_eq!(z, vec![5.0, 6.0, 7.0, 8.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(CartesianState::from_flat(&z, Dim::Planar), s);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reduced_products(m0 in 0.01f64..100.0, mu in 0.0f64..1.0, eps in 0.0f64..1.0) {
                let m = MassModel::new(m0, mu, eps).unwrap();
                let tol = 4.0 * f64::EPSILON * m0 * m0;
                prop_assert!((m.reduced_inner() * m.grav_inner() - m0 * m0).abs() <= tol);
                prop_assert!((m.reduced_outer() * m.grav_outer() - m0 * m0).abs() <= tol);
            }
        }
    }
}
