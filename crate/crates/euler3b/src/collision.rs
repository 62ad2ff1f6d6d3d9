//! Collision test between the two minor bodies through the Euler integral.
//!
//! At μ = 0 the inner ellipse passes through x′ exactly when
//! r′ = G²/(𝗆²ℳ(1 − e cos ḡ)), which is the level E₀ = 𝗆²ℳr′. For μ > 0 a
//! margin |E − 𝗆²ℳr′| well above μ𝗆²ℳr′ rules out a collision.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::Matrix3;

use crate::core_model::{CartesianState, MassModel, Vec3};
use crate::dynamics::Trajectory;
use crate::error::{domain, Result};
use crate::integrals::integral_values;
use crate::kepler::{anomalies_from_mean, state_from_elements};

pub const DEFAULT_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalRadius {
    pub r_prime: f64,
    /// Parameter p = G²/(𝗆²ℳ) of the inner ellipse.
    pub parameter: f64,
}

/// Distance r′ at which the ellipse (Λ, G, ḡ) meets the outer body.
pub fn focal_radius(lambda: f64, g: f64, g_peri: f64, masses: &MassModel) -> Result<FocalRadius> {
    if !(lambda > 0.0) || !(g.abs() <= lambda) {
        return domain(format!("need 0 < |G| ≤ Λ, got Λ = {lambda}, G = {g}"));
    }
    let e = (1.0 - (g / lambda).powi(2)).max(0.0).sqrt();
    let den = 1.0 - e * g_peri.cos();
    if !(den > 0.0) {
        return domain(format!("the ellipse does not reach the direction of x′ (1 − e cos ḡ = {den})"));
    }
    let parameter = g * g / masses.kepler_k();
    Ok(FocalRadius { r_prime: parameter / den, parameter })
}

/// Planar state on the focal configuration: outer body at rest at
/// x′ = r′·j, inner body at mean anomaly ℓ on the ellipse through x′.
pub fn focal_configuration(lambda: f64, g: f64, g_peri: f64, ell: f64, masses: &MassModel) -> Result<CartesianState> {
    let fr = focal_radius(lambda, g, g_peri, masses)?;
    let el = anomalies_from_mean(lambda, g, ell, g_peri, masses)?;
    let (y, x) = state_from_elements(&el, &Matrix3::identity(), masses);
    Ok(CartesianState::planar([0.0, 0.0], [y[0], y[1]], [0.0, fr.r_prime], [x[0], x[1]]))
}

/// Point of the ellipse (Λ, G, ḡ) at true anomaly ν = π − ḡ.
pub fn focal_point(lambda: f64, g: f64, g_peri: f64, masses: &MassModel) -> Result<Vec3> {
    let fr = focal_radius(lambda, g, g_peri, masses)?;
    // perihelion along (sin ḡ, −cos ḡ); ν = π − ḡ turns it onto +j
    let phi = g_peri - FRAC_PI_2 + (std::f64::consts::PI - g_peri);
    Ok(fr.r_prime * Vec3::new(phi.cos(), phi.sin(), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionVerdict {
    pub e: f64,
    /// |E − 𝗆²ℳr′|.
    pub margin: f64,
    /// μ𝗆²ℳr′.
    pub threshold: f64,
    pub excluded: bool,
    /// r′ minus the focal radius of the osculating inner ellipse.
    pub focal_residual: f64,
}

pub fn exclusion_verdict(state: &CartesianState, masses: &MassModel, safety: f64) -> Result<CollisionVerdict> {
    if !(safety >= 1.0) {
        return domain(format!("safety factor must be at least 1, got {safety}"));
    }
    let iv = integral_values(state, masses)?;
    let k = masses.kepler_k();
    let r_prime = state.x_prime.norm();
    let margin = (iv.e - k * r_prime).abs();
    let threshold = masses.mu() * k * r_prime;
    // focal radius G²/(k + x̂′·L) of the osculating ellipse along x̂′
    let mvec = state.x.cross(&state.y);
    let lvec = state.y.cross(&mvec) - k * state.x / state.x.norm();
    let focal = mvec.norm_squared() / (k + state.x_prime.dot(&lvec) / r_prime);
    Ok(CollisionVerdict { e: iv.e, margin, threshold, excluded: margin > safety * threshold, focal_residual: r_prime - focal })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionSweep {
    /// (t, verdict, min_separation) per sample.
    pub verdicts: Vec<(f64, CollisionVerdict, f64)>,
    pub entered_band: bool,
    pub min_abs_focal_residual: f64,
    pub closest_approach: f64,
    /// Largest decrease of the margin from its initial value.
    pub max_margin_decay: f64,
}

pub fn sweep_exclusion(traj: &Trajectory, masses: &MassModel, safety: f64) -> Result<ExclusionSweep> {
    if traj.samples.is_empty() {
        return domain("empty trajectory");
    }
    let verdicts = traj
        .samples
        .iter()
        .map(|s| Ok((s.t, exclusion_verdict(&s.state, masses, safety)?, s.min_separation)))
        .collect::<Result<Vec<_>>>()?;
    let m0 = verdicts[0].1.margin;
    Ok(ExclusionSweep {
        entered_band: verdicts.iter().any(|v| !v.1.excluded),
        min_abs_focal_residual: verdicts.iter().map(|v| v.1.focal_residual.abs()).fold(f64::INFINITY, f64::min),
        closest_approach: verdicts.iter().map(|v| v.2).fold(f64::INFINITY, f64::min),
        max_margin_decay: verdicts.iter().map(|v| m0 - v.1.margin).fold(0.0, f64::max),
        verdicts,
    })
}

pub fn write_verdict_csv<W: Write>(w: W, sweep: &ExclusionSweep) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "E", "margin", "threshold", "excluded", "min_separation"])?;
    for (t, v, sep) in &sweep.verdicts {
        wr.write_record([
            t.to_string(),
            v.e.to_string(),
            v.margin.to_string(),
            v.threshold.to_string(),
            v.excluded.to_string(),
            sep.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
