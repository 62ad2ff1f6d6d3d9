//! Instantaneous ellipse of the inner pair: elements, anomalies, Kepler
//! equation and the orbital-frame position/impulse vectors.
//!
//! Orbital-frame vectors are
//!
//! ```text
//! x̄ = a R3(ḡ - π/2) (cos ξ - e, (G/Λ) sin ξ, 0)
//! ȳ = (𝗆²ℳ/Λ) / (1 - e cos ξ) · R3(ḡ - π/2) (-sin ξ, (G/Λ) cos ξ, 0)
//! ```
//!
//! The 1/(1 - e cos ξ) factor in ȳ follows from ẋ = y/𝗆 along the Kepler
//! flow and gives |x̄ × ȳ| = G. The variant without it ([`ybar_unscaled`])
//! is kept only so tests can show it fails both checks.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;

use crate::coordinate_maps::{rot1, rot3};
use crate::core_model::{MassModel, Vec3};
use crate::error::{domain, Error, Result};

pub const KEPLER_TOL: f64 = 1e-13;
/// Below this eccentricity the perihelion is treated as undefined.
pub const CIRCULAR_E: f64 = 1e-8;

/// Wraps an angle to (-π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Solves ξ - e sin ξ = ℓ. Newton from ξ0 = ℓ + e sin ℓ with a bisection
/// fallback on [ℓ - e, ℓ + e]; the result keeps the 2π winding of ℓ.
pub fn solve_kepler(e: f64, ell: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return domain(format!("eccentricity must lie in [0, 1), got {e}"));
    }
    let l = wrap_pi(ell);
    let shift = ell - l;
    if e == 0.0 {
        return Ok(ell);
    }
    let f = |x: f64| x - e * x.sin() - l;
    let (mut lo, mut hi) = (l - e, l + e);
    let mut x = l + e * l.sin();
    for _ in 0..60 {
        let fx = f(x);
        if fx.abs() < KEPLER_TOL {
            return Ok(x + shift);
        }
        if fx > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let next = x - fx / (1.0 - e * x.cos());
        x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    // bisection to the end
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if f(mid).abs() < KEPLER_TOL || hi - lo < 1e-16 {
            return Ok(mid + shift);
        }
    }
    Err(Error::NoConvergence(format!("kepler e={e} ell={ell}")))
}

/// Elements of the instantaneous ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub a: f64,
    pub e: f64,
    pub lambda: f64,
    /// angular momentum |M|
    pub g: f64,
    pub ell: f64,
    pub xi: f64,
    pub nu: f64,
    /// r / a
    pub varrho: f64,
    /// perihelion argument ḡ
    pub g_peri: f64,
    /// set when e < [`CIRCULAR_E`] and ḡ was fixed to 0
    pub circular: bool,
}

pub fn semi_major_axis(lambda: f64, masses: &MassModel) -> f64 {
    lambda * lambda / masses.kepler_k()
}

pub fn eccentricity(lambda: f64, g: f64) -> f64 {
    (1.0 - (g / lambda).powi(2)).max(0.0).sqrt()
}

/// True anomaly from the eccentric one.
pub fn true_anomaly(e: f64, xi: f64) -> f64 {
    let s = (1.0 - e * e).sqrt();
    (s * xi.sin()).atan2(xi.cos() - e)
}

/// Elements from (Λ, G, ℓ) with ḡ attached.
pub fn anomalies_from_mean(
    lambda: f64,
    g: f64,
    ell: f64,
    g_peri: f64,
    masses: &MassModel,
) -> Result<OrbitalElements> {
    if !(g > 0.0) || !(lambda > 0.0) {
        return domain(format!("need 0 < G <= Λ, got G={g}, Λ={lambda}"));
    }
    if g > lambda * (1.0 + 1e-15) {
        return domain(format!("G = {g} exceeds Λ = {lambda}"));
    }
    let e = eccentricity(lambda, g);
    let xi = solve_kepler(e, ell)?;
    let nu = (g / lambda * xi.sin()).atan2(xi.cos() - e);
    Ok(OrbitalElements {
        a: semi_major_axis(lambda, masses),
        e,
        lambda,
        g,
        ell,
        xi,
        nu,
        varrho: 1.0 - e * xi.cos(),
        g_peri,
        circular: e < CIRCULAR_E,
    })
}

/// x̄ in the orbital frame.
pub fn xbar(el: &OrbitalElements) -> Vec3 {
    let v = Vec3::new(el.xi.cos() - el.e, el.g / el.lambda * el.xi.sin(), 0.0);
    el.a * (rot3(el.g_peri - PI / 2.0) * v)
}

/// ȳ in the orbital frame, with the 1/(1 - e cos ξ) factor.
pub fn ybar(el: &OrbitalElements, masses: &MassModel) -> Vec3 {
    ybar_unscaled(el, masses) / (1.0 - el.e * el.xi.cos())
}

/// ȳ without the 1/(1 - e cos ξ) factor. Not a Kepler impulse for e > 0.
pub fn ybar_unscaled(el: &OrbitalElements, masses: &MassModel) -> Vec3 {
    let v = Vec3::new(-el.xi.sin(), el.g / el.lambda * el.xi.cos(), 0.0);
    masses.kepler_k() / el.lambda * (rot3(el.g_peri - PI / 2.0) * v)
}

/// (y, x) = frame · (ȳ, x̄).
pub fn state_from_elements(
    el: &OrbitalElements,
    frame: &Matrix3<f64>,
    masses: &MassModel,
) -> (Vec3, Vec3) {
    (frame * ybar(el, masses), frame * xbar(el))
}

/// Two-body energy J0 = |y|²/(2𝗆) - 𝗆ℳ/|x|.
fn kepler_energy_raw(y: &Vec3, x: &Vec3, masses: &MassModel) -> f64 {
    let m = masses.reduced_inner();
    y.norm_squared() / (2.0 * m) - m * masses.grav_inner() / x.norm()
}

/// Eccentricity vector L = y × M - 𝗆²ℳ x/|x|, M = x × y.
pub fn eccentricity_vector(y: &Vec3, x: &Vec3, masses: &MassModel) -> Vec3 {
    let mvec = x.cross(y);
    y.cross(&mvec) - masses.kepler_k() * x / x.norm()
}

/// Frame whose third axis is along M = x × y: R3(Ω) R1(i), with the
/// identity (or R1(π)) when M is along ±k.
pub fn orbital_frame(mvec: &Vec3) -> Matrix3<f64> {
    let k = mvec / mvec.norm();
    let node = Vec3::new(-k[1], k[0], 0.0);
    if node.norm() < 1e-14 {
        if k[2] > 0.0 {
            Matrix3::identity()
        } else {
            rot1(PI)
        }
    } else {
        let om = k[0].atan2(-k[1]);
        let inc = k[2].clamp(-1.0, 1.0).acos();
        rot3(om) * rot1(inc)
    }
}

/// Elements of the ellipse through (y, x) and the frame in which
/// `state_from_elements` reproduces the state. With `circular_safe`, orbits
/// with e < [`CIRCULAR_E`] get ḡ = 0 and the `circular` flag instead of an
/// error.
pub fn elements_from_cartesian(
    y: &Vec3,
    x: &Vec3,
    masses: &MassModel,
    circular_safe: bool,
) -> Result<(OrbitalElements, Matrix3<f64>)> {
    let j0 = kepler_energy_raw(y, x, masses);
    if !(j0 < 0.0) {
        return Err(Error::Hyperbolic(j0));
    }
    let m = masses.reduced_inner();
    let big_m = masses.grav_inner();
    let k = masses.kepler_k();
    let a = -m * big_m / (2.0 * j0);
    let lambda = m * (big_m * a).sqrt();
    let mvec = x.cross(y);
    let g = mvec.norm();
    if g == 0.0 {
        return domain("radial orbit: angular momentum vanishes");
    }
    let e = eccentricity(lambda, g);
    let frame = orbital_frame(&mvec);
    let ft = frame.transpose();
    let r = x.norm();
    if e < CIRCULAR_E {
        if !circular_safe {
            return Err(Error::Circular(e));
        }
        let xb = ft * x;
        let xi = xb[0].atan2(-xb[1]);
        return Ok((
            OrbitalElements {
                a,
                e,
                lambda,
                g,
                ell: xi,
                xi,
                nu: xi,
                varrho: r / a,
                g_peri: 0.0,
                circular: true,
            },
            frame,
        ));
    }
    let p = ft * (eccentricity_vector(y, x, masses) / (k * e));
    let g_peri = p[0].atan2(-p[1]);
    let ecos = 1.0 - r / a;
    let esin = x.dot(y) / (m * (big_m * a).sqrt());
    let xi = esin.atan2(ecos);
    let ell = xi - esin;
    Ok((
        OrbitalElements {
            a,
            e,
            lambda,
            g,
            ell,
            xi,
            nu: true_anomaly(e, xi),
            varrho: 1.0 - e * xi.cos(),
            g_peri,
            circular: false,
        },
        frame,
    ))
}
