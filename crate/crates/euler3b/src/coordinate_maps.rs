//! Canonical charts: the K-map (spatial and planar), the planar Delaunay
//! map, Delaunay coordinates relative to a fixed axis v0, and elliptic
//! coordinates of the two-centre problem.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};

use crate::core_model::{CartesianState, MassModel, Vec3};
use crate::error::{domain, Error, Exclusion, Result};
use crate::kepler::{anomalies_from_mean, xbar, ybar, OrbitalElements};

/// Tolerance for the node non-degeneracy checks.
pub const NODE_TOL: f64 = 1e-8;

pub fn rot1(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot3(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Oriented angle from n1 to n2 about the axis b (both orthogonal to b).
pub fn oriented_angle(n1: &Vec3, n2: &Vec3, b: &Vec3) -> f64 {
    let bh = b / b.norm();
    n1.cross(n2).dot(&bh).atan2(n1.dot(n2))
}

fn acos_checked(v: f64, what: &str) -> Result<f64> {
    if !v.is_finite() || v.abs() > 1.0 + 1e-14 {
        return domain(format!("{what} = {v} lies outside [-1, 1]"));
    }
    Ok(v.clamp(-1.0, 1.0).acos())
}

/// The twelve K-coordinates (Z, C, Θ, G, Λ, R′; ζ, g, ϑ, ḡ, ℓ, r′).
/// Conjugate pairs: (Z, ζ), (C, g), (Θ, ϑ), (G, ḡ), (Λ, ℓ), (R′, r′).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KCoordinates {
    pub z: f64,
    pub c: f64,
    pub theta: f64,
    pub g: f64,
    pub lambda: f64,
    pub r_mom: f64,
    pub zeta: f64,
    pub g_node: f64,
    pub theta_angle: f64,
    pub g_peri: f64,
    pub ell: f64,
    pub r_prime: f64,
}

impl KCoordinates {
    /// Inclinations (i, i1, i2) = (acos Z/C, acos Θ/C, acos Θ/G).
    pub fn inclinations(&self) -> Result<(f64, f64, f64)> {
        if !(self.c > 0.0) || !(self.g > 0.0) {
            return domain("C and G must be positive");
        }
        Ok((
            acos_checked(self.z / self.c, "Z/C")?,
            acos_checked(self.theta / self.c, "Θ/C")?,
            acos_checked(self.theta / self.g, "Θ/G")?,
        ))
    }

    /// True when the node conditions hold with margin: sin i1 and sin i2
    /// stay above [`NODE_TOL`].
    pub fn nodes_regular(&self) -> bool {
        let s1 = 1.0 - (self.theta / self.c).powi(2);
        let s2 = 1.0 - (self.theta / self.g).powi(2);
        s1 > NODE_TOL * NODE_TOL && s2 > NODE_TOL * NODE_TOL
    }
}

/// Orbital elements of the inner pair carried by a K-point.
pub fn k_elements(k: &KCoordinates, masses: &MassModel) -> Result<OrbitalElements> {
    anomalies_from_mean(k.lambda, k.g, k.ell, k.g_peri, masses)
}

/// The K-map to heliocentric (y′, y, x′, x).
pub fn k_to_cartesian(k: &KCoordinates, masses: &MassModel) -> Result<CartesianState> {
    let (i, i1, i2) = k.inclinations()?;
    if !(k.r_prime > 0.0) {
        return domain(format!("r' must be positive, got {}", k.r_prime));
    }
    let el = k_elements(k, masses)?;
    let outer = rot3(k.zeta) * rot1(i) * rot3(k.g_node) * rot1(i1);
    let inner = outer * rot3(k.theta_angle) * rot1(i2);
    let kk = Vec3::z();
    let x = inner * xbar(&el);
    let y = inner * ybar(&el, masses);
    let x_prime = k.r_prime * (outer * kk);
    let cvec = k.c * (rot3(k.zeta) * rot1(i) * kk);
    let mvec = k.g * (inner * kk);
    let m_prime = cvec - mvec;
    let y_prime =
        k.r_mom / k.r_prime * x_prime + m_prime.cross(&x_prime) / (k.r_prime * k.r_prime);
    Ok(CartesianState::spatial(y_prime, y, x_prime, x))
}

/// Planar K-coordinates. Θ = 0, i = 0 (so Z = C), ϑ = π for σ = +1 and
/// ϑ = 0 for σ = −1. Only ψ = ζ + g enters the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarKCoordinates {
    pub c: f64,
    pub g: f64,
    pub lambda: f64,
    pub r_mom: f64,
    pub zeta: f64,
    pub g_node: f64,
    pub g_peri: f64,
    pub ell: f64,
    pub r_prime: f64,
    pub sigma: i8,
}

impl PlanarKCoordinates {
    pub fn theta_angle(&self) -> f64 {
        if self.sigma > 0 {
            PI
        } else {
            0.0
        }
    }

    pub fn to_spatial(&self) -> KCoordinates {
        KCoordinates {
            z: self.c,
            c: self.c,
            theta: 0.0,
            g: self.g,
            lambda: self.lambda,
            r_mom: self.r_mom,
            zeta: self.zeta,
            g_node: self.g_node,
            theta_angle: self.theta_angle(),
            g_peri: self.g_peri,
            ell: self.ell,
            r_prime: self.r_prime,
        }
    }

    /// Reflection D_σ applied to orbital-frame vectors.
    pub fn reflect(&self, v: &Vec3) -> Vec3 {
        if self.sigma > 0 {
            Vec3::new(-v[0], -v[1], 0.0)
        } else {
            Vec3::new(v[0], -v[1], 0.0)
        }
    }

    /// Outer impulse component along R·i, (C − σG)/r′.
    pub fn transverse(&self) -> f64 {
        (self.c - f64::from(self.sigma) * self.g) / self.r_prime
    }
}

/// Planar K-map: x = R D_σ x̄, y = R D_σ ȳ, x′ = −r′ R j,
/// y′ = −R′ R j + ((C − σG)/r′) R i, with R = R3(ζ + g).
pub fn planar_k_to_cartesian(k: &PlanarKCoordinates, masses: &MassModel) -> Result<CartesianState> {
    if k.sigma != 1 && k.sigma != -1 {
        return domain(format!("sigma must be ±1, got {}", k.sigma));
    }
    if !(k.c > 0.0) || !(k.r_prime > 0.0) {
        return domain("C and r' must be positive");
    }
    let el = anomalies_from_mean(k.lambda, k.g, k.ell, k.g_peri, masses)?;
    let rot = rot3(k.zeta + k.g_node);
    let (ei, ej) = (Vec3::x(), Vec3::y());
    let x = rot * k.reflect(&xbar(&el));
    let y = rot * k.reflect(&ybar(&el, masses));
    let x_prime = -k.r_prime * (rot * ej);
    let y_prime = -k.r_mom * (rot * ej) + k.transverse() * (rot * ei);
    let mut s = CartesianState::spatial(y_prime, y, x_prime, x);
    s.dim = crate::core_model::Dim::Planar;
    Ok(s)
}

/// Perihelion direction of a planar K-point.
pub fn planar_perihelion(k: &PlanarKCoordinates) -> Vec3 {
    let pbar = Vec3::new(k.g_peri.sin(), -k.g_peri.cos(), 0.0);
    rot3(k.zeta + k.g_node) * k.reflect(&pbar)
}

/// Planar Delaunay map (Λ, G, ℓ, ḡ) → (R, Φ, r, φ).
pub fn planar_delaunay(
    lambda: f64,
    g: f64,
    ell: f64,
    g_peri: f64,
    masses: &MassModel,
) -> Result<(f64, f64, f64, f64)> {
    let el = anomalies_from_mean(lambda, g, ell, g_peri, masses)?;
    let (s, c) = el.xi.sin_cos();
    let rr = masses.kepler_k() / lambda * el.e * s / (1.0 - el.e * c);
    let r = el.a * (1.0 - el.e * c);
    // ν carries the winding of ℓ so φ is continuous in ℓ
    let nu = el.nu + (el.xi - crate::kepler::wrap_pi(el.xi));
    Ok((rr, g, r, nu + g_peri - PI / 2.0))
}

/// Orthonormal frame with third axis along v0. The first axis is the
/// Gram–Schmidt projection of e1 (or e2 when v0 is close to e1).
pub fn axis_frame(v0: &Vec3) -> Result<Matrix3<f64>> {
    let n = v0.norm();
    if !(n > 0.0) {
        return domain("v0 must be non-zero");
    }
    let e3 = v0 / n;
    let seed = if e3[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (seed - e3 * e3.dot(&seed)).normalize();
    let e2 = e3.cross(&e1);
    Ok(Matrix3::from_columns(&[e1, e2, e3]))
}

/// Elliptic coordinates (λ, β, ω) and conjugate momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoordinates {
    pub lambda: f64,
    pub beta: f64,
    pub omega: f64,
    pub p_lambda: f64,
    pub p_beta: f64,
    pub p_omega: f64,
    pub r0: f64,
}

struct EllipticBasis {
    coords: EllipticCoordinates,
    dv_dlambda: Vec3,
    dv_dbeta: Vec3,
    dv_domega: Vec3,
}

fn elliptic_basis(v: &Vec3, v0: &Vec3) -> Result<EllipticBasis> {
    let frame = axis_frame(v0)?;
    let r0 = v0.norm();
    let rp = (v + v0).norm();
    let rm = (v - v0).norm();
    if rp <= 1e-14 * r0 || rm <= 1e-14 * r0 {
        return Err(Error::Singularity(if rp <= rm {
            Exclusion::InnerAtOrigin
        } else {
            Exclusion::InnerAtOuter
        }));
    }
    let lambda = ((rp + rm) / (2.0 * r0)).max(1.0);
    let beta = ((rp - rm) / (2.0 * r0)).clamp(-1.0, 1.0);
    let w = frame.transpose() * v;
    let omega = w[0].atan2(-w[1]);
    let e_rho = frame * Vec3::new(omega.sin(), -omega.cos(), 0.0);
    let e_om = frame * Vec3::new(omega.cos(), omega.sin(), 0.0);
    let e3 = frame.column(2).into_owned();
    let (l1, b1) = (lambda * lambda - 1.0, 1.0 - beta * beta);
    let rho = w[0].hypot(w[1]);
    let dv_dlambda = if l1 > 0.0 {
        r0 * lambda * (b1 / l1).sqrt() * e_rho + r0 * beta * e3
    } else {
        Vec3::from_element(f64::NAN)
    };
    let dv_dbeta = if b1 > 0.0 {
        -r0 * beta * (l1 / b1).sqrt() * e_rho + r0 * lambda * e3
    } else {
        Vec3::from_element(f64::NAN)
    };
    Ok(EllipticBasis {
        coords: EllipticCoordinates {
            lambda,
            beta,
            omega,
            p_lambda: 0.0,
            p_beta: 0.0,
            p_omega: 0.0,
            r0,
        },
        dv_dlambda,
        dv_dbeta,
        dv_domega: rho * e_om,
    })
}

/// Positions only; momenta are set to zero.
pub fn elliptic_from_positions(v: &Vec3, v0: &Vec3) -> Result<EllipticCoordinates> {
    Ok(elliptic_basis(v, v0)?.coords)
}

/// Full chart: momenta are the projections of u on ∂v/∂(λ, β, ω).
pub fn elliptic_from_state(u: &Vec3, v: &Vec3, v0: &Vec3) -> Result<EllipticCoordinates> {
    let b = elliptic_basis(v, v0)?;
    let c = b.coords;
    if !(c.lambda > 1.0) || !(c.beta.abs() < 1.0) {
        return Err(Error::Degenerate(format!(
            "elliptic chart degenerate at λ = {}, β = {}",
            c.lambda, c.beta
        )));
    }
    Ok(EllipticCoordinates {
        p_lambda: b.dv_dlambda.dot(u),
        p_beta: b.dv_dbeta.dot(u),
        p_omega: b.dv_domega.dot(u),
        ..c
    })
}

/// Inverse of the position part: v in the frame of [`axis_frame`].
pub fn elliptic_to_position(ec: &EllipticCoordinates, v0: &Vec3) -> Result<Vec3> {
    let frame = axis_frame(v0)?;
    let rho = ec.r0 * ((ec.lambda.powi(2) - 1.0) * (1.0 - ec.beta.powi(2))).max(0.0).sqrt();
    Ok(frame * Vec3::new(rho * ec.omega.sin(), -rho * ec.omega.cos(), ec.r0 * ec.lambda * ec.beta))
}

/// Delaunay coordinates relative to the axis v0: (Θ, 𝖬, R, ϑ, m, r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayV0 {
    pub theta: f64,
    pub m_norm: f64,
    pub r_mom: f64,
    pub theta_angle: f64,
    pub m_angle: f64,
    pub r: f64,
}

/// (Θ, 𝖬) = (M·v̂0, |M|) with M = v × u. Defined also when the nodes are
/// degenerate.
pub fn axial_momenta(u: &Vec3, v: &Vec3, v0: &Vec3) -> (f64, f64) {
    let m = v.cross(u);
    (m.dot(v0) / v0.norm(), m.norm())
}

/// Delaunay coordinates relative to v0. The reference axis i is the first
/// column of [`axis_frame`].
pub fn delaunay_v0(u: &Vec3, v: &Vec3, v0: &Vec3) -> Result<DelaunayV0> {
    let frame = axis_frame(v0)?;
    let iref = frame.column(0).into_owned();
    let m = v.cross(u);
    let mn = m.norm();
    let r = v.norm();
    if mn <= NODE_TOL * r * u.norm().max(1.0) {
        return Err(Error::Degenerate("angular momentum vanishes".into()));
    }
    let n0 = v0.cross(&m);
    if n0.norm() <= NODE_TOL * v0.norm() * mn {
        return Err(Error::Degenerate("node n0 = v0 × M vanishes".into()));
    }
    let (theta, _) = axial_momenta(u, v, v0);
    Ok(DelaunayV0 {
        theta,
        m_norm: mn,
        r_mom: u.dot(v) / r,
        theta_angle: oriented_angle(&iref, &n0, v0),
        m_angle: oriented_angle(&n0, v, &m),
        r,
    })
}

/// (R, 𝖬²) from elliptic momenta.
pub fn elliptic_momenta_to_r_msq(
    p_lambda: f64,
    p_beta: f64,
    theta: f64,
    lambda: f64,
    beta: f64,
    r0: f64,
) -> Result<(f64, f64)> {
    let (l1, b1) = (lambda * lambda - 1.0, 1.0 - beta * beta);
    let s = lambda * lambda + beta * beta - 1.0;
    if !(l1 > 0.0) || !(b1 > 0.0) || !(s > 0.0) {
        return Err(Error::Degenerate(format!(
            "elliptic momenta undefined at λ = {lambda}, β = {beta}"
        )));
    }
    let d = lambda * lambda - beta * beta;
    let r = (lambda * l1 * p_lambda + beta * b1 * p_beta) / (r0 * d * s.sqrt());
    // the first term carries (λ² − β²)²; with a single power the relation
    // fails to invert the forward momenta whenever λ² − β² ≠ 1
    let msq = (lambda * p_beta - beta * p_lambda).powi(2) * l1 * b1 / (d * d)
        + s / (b1 * l1) * theta * theta;
    Ok((r, msq))
}

/// Forward relations (p̄_λ, p̄_β) from (R, 𝖬, Θ). `sign` selects the
/// branch of the square root; it is the sign of cos m for the angle m of
/// [`delaunay_v0`].
pub fn elliptic_momenta_from_r_m(
    r_mom: f64,
    m_norm: f64,
    theta: f64,
    lambda: f64,
    beta: f64,
    r0: f64,
    sign: f64,
) -> Result<(f64, f64)> {
    let (l1, b1) = (lambda * lambda - 1.0, 1.0 - beta * beta);
    let s = lambda * lambda + beta * beta - 1.0;
    if !(l1 > 0.0) || !(b1 > 0.0) || !(s > 0.0) {
        return Err(Error::Degenerate(format!(
            "elliptic momenta undefined at λ = {lambda}, β = {beta}"
        )));
    }
    let rad = (b1 * l1 * m_norm * m_norm - s * theta * theta).max(0.0).sqrt() * sign.signum();
    let pl = r0 * lambda * r_mom / s.sqrt() - beta * rad / (s * l1);
    let pb = r0 * beta * r_mom / s.sqrt() + lambda * rad / (s * b1);
    Ok((pl, pb))
}

/// Central-difference Jacobian. Differences of outputs are wrapped to
/// (−π, π] so angle components may jump by 2π.
pub fn jacobian_fd(f: &dyn Fn(&[f64]) -> Vec<f64>, z: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(z).len();
    let mut jac = DMatrix::zeros(m, z.len());
    let mut zp = z.to_vec();
    for j in 0..z.len() {
        zp[j] = z[j] + h;
        let fp = f(&zp);
        zp[j] = z[j] - h;
        let fm = f(&zp);
        zp[j] = z[j];
        for i in 0..m {
            jac[(i, j)] = crate::kepler::wrap_pi(fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Standard form Σ dp∧dq for the layout (p1..pn, q1..qn).
pub fn standard_form(n: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        om[(i, n + i)] = 1.0;
        om[(n + i, i)] = -1.0;
    }
    om
}

/// max |JᵀΩJ − Ω| for a map between (p, q) layouts of equal dimension.
pub fn symplectic_defect(f: &dyn Fn(&[f64]) -> Vec<f64>, z: &[f64], h: f64) -> f64 {
    let jac = jacobian_fd(f, z, h);
    let om = standard_form(z.len() / 2);
    (jac.transpose() * &om * &jac - &om).amax()
}

/// Planar Delaunay as a map of (Λ, G, ℓ, ḡ) to (R, Φ, r, φ).
pub fn planar_delaunay_flat(masses: &MassModel) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |z: &[f64]| {
        let (r, p, rr, ph) = planar_delaunay(z[0], z[1], z[2], z[3], masses).expect("interior point");
        vec![r, p, rr, ph]
    }
}

/// Planar K-map as a map of (C, G, Λ, R′, ψ, ḡ, ℓ, r′) to
/// (y′, y, x′, x) in the plane, with ψ = ζ + g.
pub fn planar_k_flat(masses: &MassModel, sigma: i8) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |z: &[f64]| {
        let k = PlanarKCoordinates {
            c: z[0],
            g: z[1],
            lambda: z[2],
            r_mom: z[3],
            zeta: z[4],
            g_node: 0.0,
            g_peri: z[5],
            ell: z[6],
            r_prime: z[7],
            sigma,
        };
        let s = planar_k_to_cartesian(&k, masses).expect("interior point");
        vec![s.y_prime[0], s.y_prime[1], s.y[0], s.y[1], s.x_prime[0], s.x_prime[1], s.x[0], s.x[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::wrap_pi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rvec(rng: &mut ChaCha8Rng) -> Vec3 {
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn rotations() {
        assert_eq!(rot3(0.0), Matrix3::identity());
        assert!((rot1(PI / 2.0) * Vec3::y() - Vec3::z()).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = rng.gen_range(-PI..PI);
            for m in [rot1(a), rot3(a)] {
                assert!((m.transpose() * m - Matrix3::identity()).norm() < 1e-15);
                assert!((m.determinant() - 1.0).abs() < 1e-15);
            }
        }
    }

    fn random_k(rng: &mut ChaCha8Rng) -> KCoordinates {
        let lambda = rng.gen_range(0.8..1.5);
        let g: f64 = lambda * rng.gen_range(0.3..0.95);
        let c = rng.gen_range(1.5..3.0);
        let theta = rng.gen_range(-0.9..0.9) * g.min(c);
        KCoordinates {
            z: c * rng.gen_range(-0.9..0.9),
            c,
            theta,
            g,
            lambda,
            r_mom: rng.gen_range(-0.5..0.5),
            zeta: rng.gen_range(-PI..PI),
            g_node: rng.gen_range(-PI..PI),
            theta_angle: rng.gen_range(-PI..PI),
            g_peri: rng.gen_range(-PI..PI),
            ell: rng.gen_range(-PI..PI),
            r_prime: rng.gen_range(2.0..5.0),
        }
    }

    #[test]
    fn k_map_momenta() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = random_k(&mut rng);
            let s = k_to_cartesian(&k, &m).unwrap();
            assert!((s.x_prime.norm() - k.r_prime).abs() < 1e-12);
            assert!((s.x.cross(&s.y).norm() - k.g).abs() < 1e-10);
            let ctot = s.x.cross(&s.y) + s.x_prime.cross(&s.y_prime);
            assert!((ctot.norm() - k.c).abs() < 1e-10);
            assert!((ctot[2] - k.z).abs() < 1e-10);
            assert!((s.y_prime.dot(&s.x_prime) / k.r_prime - k.r_mom).abs() < 1e-12);
        }
    }

    #[test]
    fn k_map_domain_errors() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut k = random_k(&mut rng);
        k.z = 2.0 * k.c;
        assert!(k_to_cartesian(&k, &m).is_err());
        let mut k = random_k(&mut rng);
        k.theta = 1.1 * k.g;
        assert!(k_to_cartesian(&k, &m).is_err());
    }

    fn random_planar(rng: &mut ChaCha8Rng, sigma: i8) -> PlanarKCoordinates {
        let lambda = rng.gen_range(0.8..1.5);
        PlanarKCoordinates {
            c: rng.gen_range(1.5..3.0),
            g: lambda * rng.gen_range(0.3..0.95),
            lambda,
            r_mom: rng.gen_range(-0.5..0.5),
            zeta: rng.gen_range(-PI..PI),
            g_node: rng.gen_range(-PI..PI),
            g_peri: rng.gen_range(-PI..PI),
            ell: rng.gen_range(-PI..PI),
            r_prime: rng.gen_range(2.0..5.0),
            sigma,
        }
    }

    #[test]
    fn planar_matches_general_map() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sigma in [1, -1] {
            for _ in 0..50 {
                let p = random_planar(&mut rng, sigma);
                let a = planar_k_to_cartesian(&p, &m).unwrap();
                let b = k_to_cartesian(&p.to_spatial(), &m).unwrap();
                for (u, v) in [(a.x, b.x), (a.y, b.y), (a.x_prime, b.x_prime), (a.y_prime, b.y_prime)] {
                    assert!((u - v).norm() < 1e-12, "sigma {sigma}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn sigma_orientation() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for sigma in [1i8, -1] {
            let p = random_planar(&mut rng, sigma);
            let s = planar_k_to_cartesian(&p, &m).unwrap();
            let mz = s.x.cross(&s.y)[2];
            assert!((mz - f64::from(sigma) * p.g).abs() < 1e-12);
            let mpz = s.x_prime.cross(&s.y_prime)[2];
            assert!((mpz - (p.c - f64::from(sigma) * p.g)).abs() < 1e-12);
        }
    }

    #[test]
    fn perihelion_angle() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..100 {
            let mut p = random_planar(&mut rng, if i % 2 == 0 { 1 } else { -1 });
            let pdir = planar_perihelion(&p);
            let s = planar_k_to_cartesian(&p, &m).unwrap();
            let ang = (s.x_prime.dot(&pdir) / p.r_prime).clamp(-1.0, 1.0).acos();
            assert!((ang - (PI - wrap_pi(p.g_peri).abs())).abs() < 1e-10);
            p.ell = 0.0;
            let s0 = planar_k_to_cartesian(&p, &m).unwrap();
            assert!((s0.x / s0.x.norm() - pdir).norm() < 1e-12);
        }
    }

    #[test]
    fn delaunay_examples() {
        let m = MassModel::new(1.0, 0.0, 0.0).unwrap();
        let (r, phi, rr, ph) = planar_delaunay(1.0, 1.0, 0.4, 0.3, &m).unwrap();
        assert!(r.abs() < 1e-15 && phi == 1.0);
        assert!((rr - 1.0).abs() < 1e-15);
        assert!((ph - (0.4 + 0.3 - PI / 2.0)).abs() < 1e-15);
        let (r, _, rr, _) = planar_delaunay(1.0, 0.8, PI, 0.3, &m).unwrap();
        assert!(r.abs() < 1e-15 && (rr - 1.6).abs() < 1e-15);
        assert!(planar_delaunay(1.0, 1.2, 0.0, 0.0, &m).is_err());
    }

    #[test]
    fn elliptic_examples() {
        let v0 = Vec3::new(0.3, -0.2, 0.5);
        let r0 = v0.norm();
        let ec = elliptic_from_positions(&(2.0 * v0), &v0).unwrap();
        assert!((ec.lambda - 2.0).abs() < 1e-14 && (ec.beta - 1.0).abs() < 1e-14);
        let perp = v0.cross(&Vec3::x());
        let ec = elliptic_from_positions(&perp, &v0).unwrap();
        assert!(ec.beta.abs() < 1e-14);
        assert!(elliptic_from_positions(&v0, &v0).is_err());
        assert!(elliptic_from_positions(&(-v0), &v0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let v = rvec(&mut rng) * 2.0;
            let ec = elliptic_from_positions(&v, &v0).unwrap();
            let lhs = ec.lambda.powi(2) + ec.beta.powi(2) - 1.0;
            assert!((lhs - v.norm_squared() / (r0 * r0)).abs() < 1e-10);
            assert!((elliptic_to_position(&ec, &v0).unwrap() - v).norm() < 1e-12);
        }
    }

    #[test]
    fn delaunay_v0_examples() {
        let v0 = Vec3::new(0.0, 0.0, 0.7);
        let u = Vec3::new(0.1, 0.9, 0.0);
        let v = Vec3::new(1.2, 0.1, 0.0);
        let (th, mn) = axial_momenta(&u, &v, &v0);
        assert!((th.abs() - mn).abs() < 1e-15);
        assert!(matches!(delaunay_v0(&u, &v, &v0), Err(Error::Degenerate(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (u, v) = (rvec(&mut rng), rvec(&mut rng));
            let d = delaunay_v0(&u, &v, &v0).unwrap();
            assert!((d.r - v.norm()).abs() < 1e-15);
            assert!(d.theta.abs() <= d.m_norm);
        }
    }

    /// u·dv = Θdϑ + 𝖬dm + Rdr along random smooth curves.
    #[test]
    fn delaunay_v0_one_form() {
        let v0 = Vec3::new(0.2, 0.1, 0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = 1e-6;
        for _ in 0..30 {
            let (u0, v0p, du, dv) = (rvec(&mut rng), rvec(&mut rng), rvec(&mut rng), rvec(&mut rng));
            let at = |t: f64| (u0 + t * du, v0p + t * dv);
            let (u, _) = at(0.0);
            let (a, b) = (at(-h), at(h));
            let (da, db) = (delaunay_v0(&a.0, &a.1, &v0).unwrap(), delaunay_v0(&b.0, &b.1, &v0).unwrap());
            let d = delaunay_v0(&u, &at(0.0).1, &v0).unwrap();
            let lhs = u.dot(&dv);
            let rhs = d.theta * wrap_pi(db.theta_angle - da.theta_angle) / (2.0 * h)
                + d.m_norm * wrap_pi(db.m_angle - da.m_angle) / (2.0 * h)
                + d.r_mom * (db.r - da.r) / (2.0 * h);
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn elliptic_momenta_inversion() {
        let (r, msq) = elliptic_momenta_to_r_msq(0.0, 0.0, 0.0, 1.5, 0.3, 1.0).unwrap();
        assert_eq!((r, msq), (0.0, 0.0));
        let (l, b, th) = (1.7f64, -0.4f64, 0.35f64);
        let (_, msq) = elliptic_momenta_to_r_msq(0.0, 0.0, th, l, b, 0.8).unwrap();
        let s = l * l + b * b - 1.0;
        assert!((msq - th * th * s / ((1.0 - b * b) * (l * l - 1.0))).abs() < 1e-15);
        assert!(elliptic_momenta_to_r_msq(0.1, 0.1, 0.0, 1.0, 0.3, 1.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let l = rng.gen_range(1.05..3.0);
            let b = rng.gen_range(-0.95..0.95);
            let r0 = rng.gen_range(0.3..2.0);
            let rm = rng.gen_range(-1.0..1.0);
            let th: f64 = rng.gen_range(-0.5..0.5);
            let s: f64 = l * l + b * b - 1.0;
            let mmin = (s / ((1.0 - b * b) * (l * l - 1.0))).sqrt() * th.abs();
            let mn = mmin + rng.gen_range(0.01..1.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let (pl, pb) = elliptic_momenta_from_r_m(rm, mn, th, l, b, r0, sign).unwrap();
            let (r2, msq) = elliptic_momenta_to_r_msq(pl, pb, th, l, b, r0).unwrap();
            assert!((r2 - rm).abs() < 1e-10);
            assert!((msq - mn * mn).abs() < 1e-10);
        }
    }

    /// Elliptic momenta computed from the chart agree with the forward
    /// relations evaluated on the Delaunay coordinates of the same state.
    #[test]
    fn elliptic_momenta_match_delaunay() {
        let v0 = Vec3::new(0.1, -0.3, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let (u, v) = (rvec(&mut rng), rvec(&mut rng) * 1.5);
            let ec = elliptic_from_state(&u, &v, &v0).unwrap();
            let d = delaunay_v0(&u, &v, &v0).unwrap();
            let (r, msq) =
                elliptic_momenta_to_r_msq(ec.p_lambda, ec.p_beta, ec.p_omega, ec.lambda, ec.beta, ec.r0)
                    .unwrap();
            assert!((r - d.r_mom).abs() < 1e-10);
            assert!((msq - d.m_norm * d.m_norm).abs() < 1e-10);
            assert!((ec.p_omega - d.theta).abs() < 1e-12);
            let (pl, pb) = elliptic_momenta_from_r_m(
                d.r_mom, d.m_norm, d.theta, ec.lambda, ec.beta, ec.r0, d.m_angle.cos(),
            )
            .unwrap();
            assert!((pl - ec.p_lambda).abs() < 1e-9 && (pb - ec.p_beta).abs() < 1e-9);
            // sin m = λβ / (√(λ²+β²−1) √(1 − Θ²/𝖬²))
            let s = (ec.lambda.powi(2) + ec.beta.powi(2) - 1.0).sqrt();
            let si = (1.0 - (d.theta / d.m_norm).powi(2)).sqrt();
            assert!((d.m_angle.sin() - ec.lambda * ec.beta / (s * si)).abs() < 1e-10);
            assert!((d.r - ec.r0 * s).abs() < 1e-10);
        }
    }

    #[test]
    fn symplectic_maps() {
        let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let del = planar_delaunay_flat(&m);
        let kp = planar_k_flat(&m, 1);
        let km = planar_k_flat(&m, -1);
        for _ in 0..20 {
            let lam = rng.gen_range(0.8..1.5);
            let z = [lam, lam * rng.gen_range(0.3..0.95), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            assert!(symplectic_defect(&del, &z, 1e-6) < 1e-6);
            let p = random_planar(&mut rng, 1);
            let z = [p.c, p.g, p.lambda, p.r_mom, p.zeta, p.g_peri, p.ell, p.r_prime];
            assert!(symplectic_defect(&kp, &z, 1e-6) < 1e-6);
            assert!(symplectic_defect(&km, &z, 1e-6) < 1e-6);
        }
    }
}
