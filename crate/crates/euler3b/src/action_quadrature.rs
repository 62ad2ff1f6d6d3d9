//! Actions and the Arnold angle of the μ = 0 Euler integral.
//!
//! The action 𝒢̂₀ is the area of the Ĝ ≥ 0 part of the In-region of a level
//! curve divided by 2π for Ê < 1, and of the Ext-region for Ê > 1, so that it
//! runs continuously from 0 at the minimum to 1 at the maximum. All integrals
//! are taken in θ, Ĝ = Ĝ_low + w sin²(θ/2), which removes the square-root
//! folds at the turning points.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use rayon::prelude::*;

use crate::core_model::MassModel;
use crate::error::{domain, Error, Result};
use crate::phase_portrait::{e_hat0, Level};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-13;

/// Λ = √(−𝗆³ℳ²/(2J)).
pub fn l0_of_j(j: f64, masses: &MassModel) -> Result<f64> {
    if !(j < 0.0) {
        return domain(format!("J must be negative, got {j}"));
    }
    let (m, big_m) = (masses.reduced_inner(), masses.grav_inner());
    Ok((-m.powi(3) * big_m * big_m / (2.0 * j)).sqrt())
}

/// J = −𝗆³ℳ²/(2Λ²).
pub fn j_of_l0(lambda: f64, masses: &MassModel) -> f64 {
    let (m, big_m) = (masses.reduced_inner(), masses.grav_inner());
    -m.powi(3) * big_m * big_m / (2.0 * lambda * lambda)
}

/// δ = r′/a = −2r′J/(𝗆ℳ).
pub fn delta_of(j: f64, r_prime: f64, masses: &MassModel) -> f64 {
    -2.0 * r_prime * j / (masses.reduced_inner() * masses.grav_inner())
}

/// θ range covering Ĝ ∈ [Ĝ_min, Ĝ_max].
fn theta_range(lv: &Level) -> (f64, f64) {
    (if lv.crossing { FRAC_PI_2 } else { 0.0 }, PI)
}

/// ∫ g₊ dĜ over [Ĝ_min, Ĝ_max].
fn g_plus_integral(lv: &Level) -> Result<f64> {
    let w = lv.width();
    if w == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = theta_range(lv);
    Ok(integrate(|th: f64| lv.g_plus_at(th) * 0.5 * w * th.sin(), a, b, QUAD_TOL, 0.0)?.value)
}

/// Scaled action 𝒢̂₀(Ê; δ) ∈ [0, 1].
pub fn g0_scaled(e_hat: f64, delta: f64) -> Result<f64> {
    let lv = Level::new(e_hat, delta)?;
    let base = if e_hat < 1.0 { lv.gmax } else { 1.0 };
    Ok(base - g_plus_integral(&lv)? / PI)
}

/// Time-like integral ∫ dĜ/√P between two values of Ĝ in [Ĝ_low, Ĝ_max].
fn time_integral(lv: &Level, from: f64, to: f64) -> Result<f64> {
    let (a, b) = (lv.theta_of(from), lv.theta_of(to));
    Ok(integrate(|th: f64| 1.0 / lv.rest(lv.g_hat_at(th)).sqrt(), a, b, QUAD_TOL, 1e-13)?.value)
}

fn check_regular(e_hat: f64, delta: f64) -> Result<()> {
    if e_hat == delta || e_hat == 1.0 {
        return Err(Error::Divergence(format!("Ê = {e_hat} lies on a separatrix for δ = {delta}")));
    }
    if e_hat == -delta || e_hat == 1.0 + delta * delta / 4.0 {
        return Err(Error::Degenerate(format!("Ê = {e_hat} is a critical value for δ = {delta}")));
    }
    Ok(())
}

/// d𝒢̂₀/dÊ = (1/π)∫ dĜ/√((Ĝ² − Ĝ₋²)(Ĝ₊² − Ĝ²)).
pub fn dg0_scaled(e_hat: f64, delta: f64) -> Result<f64> {
    let lv = Level::new(e_hat, delta)?;
    check_regular(e_hat, delta)?;
    let (a, b) = theta_range(&lv);
    let v = integrate(|th: f64| 1.0 / lv.rest(lv.g_hat_at(th)).sqrt(), a, b, QUAD_TOL, 1e-13)?.value / PI;
    if !v.is_finite() {
        return Err(Error::Divergence(format!("action derivative diverges at Ê = {e_hat}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior(u8),
    /// Minimum, maximum, or one of the separatrices Σ₀ (Ê = δ), Σ₁ (Ê = 1).
    Boundary(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionInfo {
    pub region: Region,
    /// E − 𝗆²ℳr′.
    pub dist_sigma0: f64,
    /// E + 𝗆³ℳ²/(2J).
    pub dist_sigma1: f64,
}

pub fn region_of_scaled(e_hat: f64, delta: f64) -> Result<Region> {
    Level::new(e_hat, delta)?;
    let (lo, hi) = (delta.min(1.0), delta.max(1.0));
    Ok(if e_hat == -delta {
        Region::Boundary("minimum")
    } else if e_hat == 1.0 + delta * delta / 4.0 {
        Region::Boundary("maximum")
    } else if e_hat == delta && delta == 1.0 {
        Region::Boundary("sigma0-sigma1")
    } else if e_hat == delta {
        Region::Boundary("sigma0")
    } else if e_hat == 1.0 {
        Region::Boundary("sigma1")
    } else if e_hat < lo {
        Region::Interior(1)
    } else if e_hat < hi {
        Region::Interior(2)
    } else {
        Region::Interior(3)
    })
}

pub fn region_of(j: f64, e: f64, r_prime: f64, masses: &MassModel) -> Result<RegionInfo> {
    let lambda = l0_of_j(j, masses)?;
    let delta = delta_of(j, r_prime, masses);
    let region = region_of_scaled(e / (lambda * lambda), delta)?;
    Ok(RegionInfo {
        region,
        dist_sigma0: e - masses.kepler_k() * r_prime,
        dist_sigma1: e - lambda * lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionPair {
    pub l0: f64,
    pub g0_action: f64,
    pub region: Region,
    /// Area enclosed by the projected level curve in the strip [0, Λ], over 2π.
    pub in_action: f64,
    /// Λ − In.
    pub ext_action: f64,
}

pub fn g0_action(j: f64, e: f64, r_prime: f64, masses: &MassModel) -> Result<ActionPair> {
    let l0 = l0_of_j(j, masses)?;
    let delta = delta_of(j, r_prime, masses);
    let e_hat = e / (l0 * l0);
    let g = g0_scaled(e_hat, delta)?;
    let region = region_of_scaled(e_hat, delta)?;
    let g0 = l0 * g;
    let (in_action, ext_action) = if e_hat <= 1.0 { (g0, l0 - g0) } else { (l0 - g0, g0) };
    Ok(ActionPair { l0, g0_action: g0, region, in_action, ext_action })
}

/// d𝒢₀/dE at fixed J and r′.
pub fn dg0_de(j: f64, e: f64, r_prime: f64, masses: &MassModel) -> Result<f64> {
    let l0 = l0_of_j(j, masses)?;
    let delta = delta_of(j, r_prime, masses);
    Ok(dg0_scaled(e / (l0 * l0), delta)? / l0)
}

/// γ̂₀ = 2πt/T at the point (Λ, G, g), with t the time from the top point
/// (Ĝ_max, g = π below Ê = 1, g = 0 above) along Ĝ̇ = δ√(1 − Ĝ²) sin g.
pub fn arnold_angle(lambda: f64, g_big: f64, g_peri: f64, r_prime: f64, masses: &MassModel) -> Result<f64> {
    if !(lambda > 0.0) || g_big.abs() > lambda {
        return domain(format!("need 0 < |G| ≤ Λ, got Λ = {lambda}, G = {g_big}"));
    }
    let delta = r_prime * masses.kepler_k() / (lambda * lambda);
    let (mut gh, mut g) = (g_big / lambda, g_peri);
    let e_hat = e_hat0(gh, g, delta);
    let lv = Level::new(e_hat, delta)?;
    check_regular(e_hat, delta)?;
    if !lv.crossing && gh < 0.0 {
        // the loop in 𝒟₋ is the image of the one in 𝒟₊
        gh = -gh;
        g = -g;
    }
    let gh = gh.clamp(lv.glow, lv.gmax);
    let half = time_integral(&lv, lv.glow, lv.gmax)?;
    let t = if g.sin() < 0.0 {
        time_integral(&lv, gh, lv.gmax)?
    } else {
        half + time_integral(&lv, lv.glow, gh)?
    };
    Ok((TAU * t / (2.0 * half)).rem_euclid(TAU))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionRow {
    pub delta: f64,
    pub e_hat: f64,
    pub g0_scaled: f64,
    pub dg0_de: Option<f64>,
    pub region: Region,
}

/// Scaled actions over a grid, rows in input order.
pub fn action_table(points: &[(f64, f64)]) -> Result<Vec<ActionRow>> {
    points
        .par_iter()
        .map(|&(delta, e_hat)| {
            Ok(ActionRow {
                delta,
                e_hat,
                g0_scaled: g0_scaled(e_hat, delta)?,
                dg0_de: dg0_scaled(e_hat, delta).ok(),
                region: region_of_scaled(e_hat, delta)?,
            })
        })
        .collect()
}

pub fn write_action_table_csv<W: Write>(w: W, rows: &[ActionRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["delta", "E_hat", "G0_scaled", "dG0_dE", "region"])?;
    for r in rows {
        let region = match r.region {
            Region::Interior(j) => j.to_string(),
            Region::Boundary(tag) => tag.to_string(),
        };
        let d = r.dg0_de.map_or_else(|| "inf".to_string(), |v| v.to_string());
        wr.write_record([r.delta.to_string(), r.e_hat.to_string(), r.g0_scaled.to_string(), d, region])?;
    }
    wr.flush()?;
    Ok(())
}
