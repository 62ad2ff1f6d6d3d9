//! Hamiltonians and first integrals in Cartesian, K and elliptic charts.
//!
//! The Euler integral is reported as E = E0 + μE1; the term
//! E2 = 𝗆|x′|²J/2 is itself an integral of J and is only exposed through
//! [`euler_decomposition`].

use crate::coordinate_maps::{EllipticCoordinates, KCoordinates, PlanarKCoordinates};
use crate::core_model::{CartesianState, MassModel, Vec3};
use crate::error::{domain, Error, Exclusion, Result};
use crate::kepler::{anomalies_from_mean, ybar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralValues {
    pub j0: f64,
    pub j: f64,
    pub e: f64,
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub h: f64,
    /// H without the ε² group
    pub h0: f64,
}

fn nonzero(v: &Vec3, which: Exclusion) -> Result<f64> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        Err(Error::Singularity(which))
    } else {
        Ok(n)
    }
}

/// J0 = |y|²/(2𝗆) − 𝗆ℳ/|x|.
pub fn kepler_energy(y: &Vec3, x: &Vec3, masses: &MassModel) -> Result<f64> {
    let r = nonzero(x, Exclusion::InnerAtOrigin)?;
    let m = masses.reduced_inner();
    Ok(y.norm_squared() / (2.0 * m) - m * masses.grav_inner() / r)
}

/// J = J0 − μ𝗆ℳ/|x − x′|.
pub fn two_centre_energy(y: &Vec3, x: &Vec3, x_prime: &Vec3, masses: &MassModel) -> Result<f64> {
    let j0 = kepler_energy(y, x, masses)?;
    let d = nonzero(&(x - x_prime), Exclusion::InnerAtOuter)?;
    Ok(j0 - masses.mu() * masses.reduced_inner() * masses.grav_inner() / d)
}

/// (E0, E1, E2) with E0 = |M|² − x′·L, E1 = 𝗆²ℳ (x′−x)·x′/|x′−x|,
/// E2 = 𝗆|x′|²J/2.
pub fn euler_decomposition(
    y: &Vec3,
    x: &Vec3,
    x_prime: &Vec3,
    masses: &MassModel,
) -> Result<(f64, f64, f64)> {
    let r = nonzero(x, Exclusion::InnerAtOrigin)?;
    let dvec = x_prime - x;
    let d = nonzero(&dvec, Exclusion::InnerAtOuter)?;
    let k = masses.kepler_k();
    let mvec = x.cross(y);
    let lvec = y.cross(&mvec) - k * x / r;
    let e0 = mvec.norm_squared() - x_prime.dot(&lvec);
    let e1 = k * dvec.dot(x_prime) / d;
    let j = two_centre_energy(y, x, x_prime, masses)?;
    let e2 = masses.reduced_inner() * x_prime.norm_squared() * j / 2.0;
    Ok((e0, e1, e2))
}

/// E = E0 + μE1.
pub fn euler_integral_cartesian(
    y: &Vec3,
    x: &Vec3,
    x_prime: &Vec3,
    masses: &MassModel,
) -> Result<f64> {
    let (e0, e1, _) = euler_decomposition(y, x, x_prime, masses)?;
    Ok(e0 + masses.mu() * e1)
}

/// Quantities of the K-chart shared by J and E: (a, ϱ, ν, sin i2, e).
struct KShape {
    a: f64,
    varrho: f64,
    nu: f64,
    sin_i2: f64,
    e: f64,
}

fn k_shape(lambda: f64, g: f64, theta: f64, ell: f64, masses: &MassModel) -> Result<KShape> {
    let el = anomalies_from_mean(lambda, g, ell, 0.0, masses)?;
    let c2 = 1.0 - (theta / g).powi(2);
    if c2 < -1e-14 {
        return domain(format!("|Θ| = {} exceeds G = {g}", theta.abs()));
    }
    Ok(KShape { a: el.a, varrho: el.varrho, nu: el.nu, sin_i2: c2.max(0.0).sqrt(), e: el.e })
}

fn k_distance(sh: &KShape, r_prime: f64, g_peri: f64) -> f64 {
    let ar = sh.a * sh.varrho;
    (r_prime * r_prime + 2.0 * r_prime * ar * sh.sin_i2 * (g_peri + sh.nu).cos() + ar * ar).sqrt()
}

/// J in K-coordinates.
pub fn two_centre_energy_k(k: &KCoordinates, masses: &MassModel) -> Result<f64> {
    let sh = k_shape(k.lambda, k.g, k.theta, k.ell, masses)?;
    let (m, big_m) = (masses.reduced_inner(), masses.grav_inner());
    let d = k_distance(&sh, k.r_prime, k.g_peri);
    Ok(-m.powi(3) * big_m * big_m / (2.0 * k.lambda * k.lambda) - masses.mu() * m * big_m / d)
}

/// E in K-coordinates.
pub fn euler_integral_k(k: &KCoordinates, masses: &MassModel) -> Result<f64> {
    let sh = k_shape(k.lambda, k.g, k.theta, k.ell, masses)?;
    let kk = masses.kepler_k();
    let rp = k.r_prime;
    let d = k_distance(&sh, rp, k.g_peri);
    let e0 = k.g * k.g + kk * rp * sh.sin_i2 * sh.e * k.g_peri.cos();
    let e1 = kk * rp * (rp + sh.a * sh.varrho * sh.sin_i2 * (k.g_peri + sh.nu).cos()) / d;
    Ok(e0 + masses.mu() * e1)
}

/// E in planar K-coordinates (both σ give the Θ = 0 formula).
pub fn euler_integral_planar_k(k: &PlanarKCoordinates, masses: &MassModel) -> Result<f64> {
    euler_integral_k(&k.to_spatial(), masses)
}

pub fn two_centre_energy_planar_k(k: &PlanarKCoordinates, masses: &MassModel) -> Result<f64> {
    two_centre_energy_k(&k.to_spatial(), masses)
}

/// The three groups of H: (−𝗆′ℳ′/|x′|, J, ε²-group), so that
/// H = first + ε·J + ε²·third.
pub fn hamiltonian_groups(s: &CartesianState, masses: &MassModel) -> Result<(f64, f64, f64)> {
    let rp = nonzero(&s.x_prime, Exclusion::OuterAtOrigin)?;
    let outer = -masses.reduced_outer() * masses.grav_outer() / rp;
    let j = two_centre_energy(&s.y, &s.x, &s.x_prime, masses)?;
    let third = s.y_prime.norm_squared() / (2.0 * masses.reduced_outer())
        + masses.mu() / masses.m0() * s.y_prime.dot(&s.y);
    Ok((outer, j, third))
}

/// The full Hamiltonian in rescaled heliocentric variables.
pub fn full_hamiltonian(s: &CartesianState, masses: &MassModel) -> Result<f64> {
    let (a, b, c) = hamiltonian_groups(s, masses)?;
    let eps = masses.eps();
    Ok(a + eps * b + eps * eps * c)
}

/// The Hamiltonian in planar K-coordinates. The coupling is
/// (μ/m0)(−R′ j + w i)·D_σ ȳ with w = (C − σG)/r′.
pub fn full_hamiltonian_planar_k(k: &PlanarKCoordinates, masses: &MassModel) -> Result<f64> {
    let eps = masses.eps();
    let el = anomalies_from_mean(k.lambda, k.g, k.ell, k.g_peri, masses)?;
    let yb = k.reflect(&ybar(&el, masses));
    let w = k.transverse();
    let mp = masses.reduced_outer();
    let j = two_centre_energy_planar_k(k, masses)?;
    let third = (k.r_mom * k.r_mom + w * w) / (2.0 * mp)
        + masses.mu() / masses.m0() * (-k.r_mom * yb[1] + w * yb[0]);
    Ok(-mp * masses.grav_outer() / k.r_prime + eps * j + eps * eps * third)
}

/// Coupling as printed for (↑↑): −R′ȳ₂ + ((C − G)/r′)ȳ₁ on the undressed
/// orbital-frame impulse. Agrees with the Cartesian value only for the
/// literal planar formulas; kept for the comparison test.
pub fn planar_coupling_printed(k: &PlanarKCoordinates, masses: &MassModel) -> Result<f64> {
    let el = anomalies_from_mean(k.lambda, k.g, k.ell, k.g_peri, masses)?;
    let yb = ybar(&el, masses);
    Ok(-k.r_mom * yb[1] + (k.c - k.g) / k.r_prime * yb[0])
}

pub fn integral_values(s: &CartesianState, masses: &MassModel) -> Result<IntegralValues> {
    let j0 = kepler_energy(&s.y, &s.x, masses)?;
    let (e0, e1, e2) = euler_decomposition(&s.y, &s.x, &s.x_prime, masses)?;
    let (a, j, c) = hamiltonian_groups(s, masses)?;
    let eps = masses.eps();
    Ok(IntegralValues {
        j0,
        j,
        e: e0 + masses.mu() * e1,
        e0,
        e1,
        e2,
        h: a + eps * j + eps * eps * c,
        h0: a + eps * j,
    })
}

/// Two-centre problem in symmetric variables: bodies m₊ at −v0 and m₋ at
/// +v0, particle at v with impulse u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCentreFrame {
    pub u: Vec3,
    pub v: Vec3,
    pub v0: Vec3,
    pub m_plus: f64,
    pub m_minus: f64,
}

/// u = y/𝗆, v = x − x′/2, v0 = x′/2, m₊ = ℳ, m₋ = μℳ. Then J = 𝗆·J̄ and
/// E0 + μE1 + E2 = 𝗆²·Ē.
pub fn to_two_centre_frame(y: &Vec3, x: &Vec3, x_prime: &Vec3, masses: &MassModel) -> TwoCentreFrame {
    TwoCentreFrame {
        u: y / masses.reduced_inner(),
        v: x - x_prime / 2.0,
        v0: x_prime / 2.0,
        m_plus: masses.grav_inner(),
        m_minus: masses.mu() * masses.grav_inner(),
    }
}

/// J̄ = |u|²/2 − m₊/|v + v0| − m₋/|v − v0|.
pub fn two_centre_reduced_energy(f: &TwoCentreFrame) -> Result<f64> {
    let rp = nonzero(&(f.v + f.v0), Exclusion::InnerAtOrigin)?;
    let rm = nonzero(&(f.v - f.v0), Exclusion::InnerAtOuter)?;
    Ok(f.u.norm_squared() / 2.0 - f.m_plus / rp - f.m_minus / rm)
}

/// Ē = |v × u|² + (v0·u)² + 2 v·v0 (m₊/|v+v0| − m₋/|v−v0|).
pub fn euler_integral_symmetric(f: &TwoCentreFrame) -> Result<f64> {
    let rp = nonzero(&(f.v + f.v0), Exclusion::InnerAtOrigin)?;
    let rm = nonzero(&(f.v - f.v0), Exclusion::InnerAtOuter)?;
    Ok(f.v.cross(&f.u).norm_squared()
        + f.v0.dot(&f.u).powi(2)
        + 2.0 * f.v.dot(&f.v0) * (f.m_plus / rp - f.m_minus / rm))
}

/// Separated functions of the Hamilton–Jacobi equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticEuler {
    pub e_bar: f64,
    pub f_lambda: f64,
    pub f_beta: f64,
}

fn elliptic_regular(ec: &EllipticCoordinates) -> Result<(f64, f64)> {
    let l1 = ec.lambda * ec.lambda - 1.0;
    let b1 = 1.0 - ec.beta * ec.beta;
    if !(l1 > 0.0) || !(b1 > 0.0) {
        return Err(Error::Degenerate(format!(
            "elliptic chart degenerate at λ = {}, β = {}",
            ec.lambda, ec.beta
        )));
    }
    Ok((l1, b1))
}

/// J̄ in elliptic coordinates. The potential enters as
/// (−(m₊+m₋)λ + (m₊−m₋)β)/r0 inside the bracket.
pub fn elliptic_hamiltonian(ec: &EllipticCoordinates, m_plus: f64, m_minus: f64) -> Result<f64> {
    let (l1, b1) = elliptic_regular(ec)?;
    let r02 = ec.r0 * ec.r0;
    let kin = (ec.p_lambda.powi(2) * l1 + ec.p_beta.powi(2) * b1
        + ec.p_omega.powi(2) * (1.0 / b1 + 1.0 / l1))
        / (2.0 * r02);
    let pot = (-(m_plus + m_minus) * ec.lambda + (m_plus - m_minus) * ec.beta) / ec.r0;
    Ok((kin + pot) / (ec.lambda.powi(2) - ec.beta.powi(2)))
}

/// Ē = ½(𝓕_β − 𝓕_λ) with
/// 𝓕_λ = p_λ²(λ²−1) + p_ω²/(λ²−1) − 2r0(m₊+m₋)λ − 2r0²λ²h,
/// 𝓕_β = p_β²(1−β²) + p_ω²/(1−β²) + 2r0(m₊−m₋)β + 2r0²β²h.
pub fn elliptic_euler_integral(
    ec: &EllipticCoordinates,
    m_plus: f64,
    m_minus: f64,
    h: f64,
) -> Result<EllipticEuler> {
    let (l1, b1) = elliptic_regular(ec)?;
    let (r0, po2) = (ec.r0, ec.p_omega * ec.p_omega);
    let f_lambda = ec.p_lambda.powi(2) * l1 + po2 / l1
        - 2.0 * r0 * (m_plus + m_minus) * ec.lambda
        - 2.0 * r0 * r0 * ec.lambda.powi(2) * h;
    let f_beta = ec.p_beta.powi(2) * b1 + po2 / b1
        + 2.0 * r0 * (m_plus - m_minus) * ec.beta
        + 2.0 * r0 * r0 * ec.beta.powi(2) * h;
    Ok(EllipticEuler { e_bar: 0.5 * (f_beta - f_lambda), f_lambda, f_beta })
}

/// The same separated functions with the mass terms exactly as printed
/// (no r0 factor). Equal to [`elliptic_euler_integral`] only at r0 = 1.
pub fn elliptic_euler_integral_printed(
    ec: &EllipticCoordinates,
    m_plus: f64,
    m_minus: f64,
    h: f64,
) -> Result<f64> {
    let (l1, b1) = elliptic_regular(ec)?;
    let po2 = ec.p_omega * ec.p_omega;
    Ok(ec.p_beta.powi(2) / 2.0 * b1 - ec.p_lambda.powi(2) / 2.0 * l1
        + po2 / 2.0 * (1.0 / b1 - 1.0 / l1)
        + m_plus * (ec.lambda + ec.beta)
        + m_minus * (ec.lambda - ec.beta)
        + ec.r0 * ec.r0 * (ec.lambda.powi(2) + ec.beta.powi(2)) * h)
}
