//! The (g, Ĝ) portrait of the μ = 0 Euler integral
//! Ê₀(Ĝ, g) = Ĝ² + δ√(1 − Ĝ²) cos g, and its μ > 0 deformation.
//!
//! Level sets are sampled through θ ∈ [0, π] with Ĝ = Ĝ_low + w sin²(θ/2),
//! which clusters points like a square root at the folds where ∂g/∂Ĝ
//! blows up and keeps every quantity free of cancellation there.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;

use crate::core_model::MassModel;
use crate::error::{domain, Error, Result};
use crate::kepler::{solve_kepler, true_anomaly};

/// Scaled energy Ê₀ at (Ĝ, g).
pub fn e_hat0(g_hat: f64, g: f64, delta: f64) -> f64 {
    g_hat * g_hat + delta * (1.0 - g_hat * g_hat).max(0.0).sqrt() * g.cos()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 2.0) {
        return domain(format!("delta must lie in (0, 2), got {delta}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitParams {
    pub delta: f64,
    pub e_hat: f64,
    pub lambda: f64,
}

impl PortraitParams {
    /// δ = r′/a and Ê = E/Λ² from the integrals J < 0 and E.
    pub fn from_integrals(j: f64, e: f64, r_prime: f64, masses: &MassModel) -> Result<Self> {
        let lambda = crate::action_quadrature::l0_of_j(j, masses)?;
        let a = lambda * lambda / masses.kepler_k();
        Ok(Self { delta: r_prime / a, e_hat: e / (lambda * lambda), lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub g: f64,
    pub g_hat: f64,
    pub value: f64,
}

/// Minimum P₋ = (π, 0), saddle P₀ = (0, 0) and maximum P₊ = (0, √(1 − δ²/4)).
pub fn critical_points(delta: f64) -> Result<[CriticalPoint; 3]> {
    check_delta(delta)?;
    Ok([
        CriticalPoint { g: PI, g_hat: 0.0, value: -delta },
        CriticalPoint { g: 0.0, g_hat: 0.0, value: delta },
        CriticalPoint { g: 0.0, g_hat: (1.0 - delta * delta / 4.0).sqrt(), value: 1.0 + delta * delta / 4.0 },
    ])
}

/// (Ĝ₋², Ĝ₊²) = Ê − δ²/2 ∓ δ√(1 + δ²/4 − Ê).
pub fn g_hat_pm(e_hat: f64, delta: f64) -> Result<(f64, f64)> {
    let top = 1.0 + delta * delta / 4.0;
    if e_hat > top {
        return domain(format!("level Ê = {e_hat} is empty above the maximum {top}"));
    }
    let s = (top - e_hat).sqrt();
    let gp2 = e_hat - delta * delta / 2.0 + delta * s;
    // product form avoids cancellation when Ĝ₋² is small
    let gm2 = if gp2 > 0.0 { (e_hat * e_hat - delta * delta) / gp2 } else { e_hat - delta * delta / 2.0 - delta * s };
    Ok((gm2, gp2))
}

/// (Ĝ_min, Ĝ_max) on the level Ê.
pub fn g_hat_bounds(e_hat: f64, delta: f64) -> Result<(f64, f64)> {
    let l = Level::new(e_hat, delta)?;
    Ok((l.gmin, l.gmax))
}

/// Geometry of one level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Level {
    pub delta: f64,
    pub e_hat: f64,
    pub gm2: f64,
    pub gp2: f64,
    pub gmin: f64,
    pub gmax: f64,
    /// Lower end of the Ĝ sweep: −Ĝ_max when the curve crosses Ĝ = 0.
    pub glow: f64,
    pub crossing: bool,
}

impl Level {
    pub fn new(e_hat: f64, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        if !(e_hat >= -delta) || !(e_hat <= 1.0 + delta * delta / 4.0) {
            return domain(format!("Ê = {e_hat} outside [−δ, 1 + δ²/4] for δ = {delta}"));
        }
        let (gm2, gp2) = g_hat_pm(e_hat, delta)?;
        let gmax = gp2.clamp(0.0, 1.0).sqrt();
        let crossing = e_hat <= delta;
        let gmin = if crossing { 0.0 } else { gm2.max(0.0).sqrt().min(gmax) };
        let glow = if crossing { -gmax } else { gmin };
        Ok(Self { delta, e_hat, gm2, gp2, gmin, gmax, glow, crossing })
    }

    pub fn width(&self) -> f64 {
        self.gmax - self.glow
    }

    pub fn g_hat_at(&self, theta: f64) -> f64 {
        let s = (0.5 * theta).sin();
        self.glow + self.width() * s * s
    }

    /// θ of a Ĝ inside [Ĝ_low, Ĝ_max].
    pub fn theta_of(&self, g_hat: f64) -> f64 {
        let w = self.width();
        if w == 0.0 {
            return 0.0;
        }
        2.0 * ((g_hat - self.glow) / w).clamp(0.0, 1.0).sqrt().asin()
    }

    /// P(Ĝ)/((Ĝ − Ĝ_low)(Ĝ_max − Ĝ)) with P = (Ĝ² − Ĝ₋²)(Ĝ₊² − Ĝ²).
    pub fn rest(&self, g_hat: f64) -> f64 {
        if self.crossing {
            g_hat * g_hat - self.gm2
        } else {
            (g_hat + self.gmin) * (self.gmax + g_hat)
        }
    }

    /// δ√(1 − Ĝ²) sin g₊ = √P at θ.
    pub fn sqrt_p_at(&self, theta: f64) -> f64 {
        let gh = self.g_hat_at(theta);
        0.5 * self.width() * theta.sin().abs() * self.rest(gh).max(0.0).sqrt()
    }

    /// g₊ ∈ [0, π] at θ.
    pub fn g_plus_at(&self, theta: f64) -> f64 {
        let gh = self.g_hat_at(theta);
        self.sqrt_p_at(theta).atan2(self.e_hat - gh * gh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    LibrationPi,
    Separatrix0,
    Rotation,
    CurveE1,
    LibrationZero,
    MaximumPoint,
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::LibrationPi => "libration-pi",
            Regime::Separatrix0 => "separatrix-0",
            Regime::Rotation => "rotation",
            Regime::CurveE1 => "curve-E=1",
            Regime::LibrationZero => "libration-0",
            Regime::MaximumPoint => "maximum-point",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitClassification {
    pub regime: Regime,
    /// Range swept by g along the curve, when g does not rotate.
    pub elongation: Option<(f64, f64)>,
    /// For libration about 0: cos of the maximal |g|, (2/δ)√(Ê − 1).
    pub elongation_cos: Option<f64>,
    pub critical_points: [CriticalPoint; 3],
}

/// Regime of the level Ê for the ratio δ. Exact comparisons: the tag
/// changes precisely at δ, 1 and 1 + δ²/4.
pub fn classify(e_hat: f64, delta: f64) -> Result<PortraitClassification> {
    Level::new(e_hat, delta)?;
    let critical_points = critical_points(delta)?;
    let top = 1.0 + delta * delta / 4.0;
    let lib_pi = |e: f64| {
        let g = (e / delta).clamp(-1.0, 1.0).acos();
        Some((g, 2.0 * PI - g))
    };
    let (regime, elongation, elongation_cos) = if e_hat == top {
        (Regime::MaximumPoint, Some((0.0, 0.0)), Some(1.0))
    } else if e_hat == delta {
        (Regime::Separatrix0, None, None)
    } else if e_hat == 1.0 {
        (Regime::CurveE1, None, None)
    } else if e_hat < delta.min(1.0) {
        (Regime::LibrationPi, lib_pi(e_hat), None)
    } else if e_hat < 1.0 {
        (Regime::Rotation, None, None)
    } else {
        let c = 2.0 / delta * (e_hat - 1.0).sqrt();
        let g = c.min(1.0).acos();
        (Regime::LibrationZero, Some((-g, g)), Some(c))
    };
    Ok(PortraitClassification { regime, elongation, elongation_cos, critical_points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    /// g = ±g₊(Ĝ) on 𝒟₊ (Ĝ ≥ 0) or 𝒟₋ (Ĝ ≤ 0).
    Graph { g_sign: i8, d_sign: i8 },
    /// Ĝ = ±1 at Ê = 1.
    Boundary { d_sign: i8 },
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: BranchLabel,
    /// (g, Ĝ) samples, ordered along the branch.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub delta: f64,
    pub e_hat: f64,
    pub branches: Vec<Branch>,
    pub closed: bool,
}

impl LevelCurve {
    pub fn points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.branches.iter().flat_map(|b| b.points.iter())
    }

    pub fn max_residual(&self) -> f64 {
        self.points().map(|&(g, gh)| (e_hat0(gh, g, self.delta) - self.e_hat).abs()).fold(0.0, f64::max)
    }
}

/// Samples the level Ê with `n_samples` points per branch. g is reported
/// in [0, 2π) for levels below 1 (curves around π) and in (−π, π] above.
pub fn sample_level_curve(e_hat: f64, delta: f64, n_samples: usize) -> Result<LevelCurve> {
    let lv = Level::new(e_hat, delta)?;
    let n = n_samples.max(2);
    if lv.width() == 0.0 {
        let g = if e_hat < 1.0 { PI } else { 0.0 };
        let mut branches = vec![Branch { label: BranchLabel::Point, points: vec![(g, lv.gmax)] }];
        if lv.gmax > 0.0 {
            branches.push(Branch { label: BranchLabel::Point, points: vec![(g, -lv.gmax)] });
        }
        return Ok(LevelCurve { delta, e_hat, branches, closed: true });
    }
    let around_pi = e_hat < 1.0;
    // the D₊ part of the θ sweep
    let theta0 = if lv.crossing { FRAC_PI_2 } else { 0.0 };
    let upper: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let th = theta0 + (PI - theta0) * i as f64 / (n - 1) as f64;
            let gh = if lv.crossing && i == 0 { 0.0 } else { lv.g_hat_at(th) };
            (lv.g_plus_at(th), gh)
        })
        .collect();
    let mut branches = Vec::new();
    for d_sign in [1i8, -1] {
        for g_sign in [1i8, -1] {
            let points = upper
                .iter()
                .map(|&(g, gh)| {
                    let g = if g_sign > 0 {
                        g
                    } else if around_pi {
                        2.0 * PI - g
                    } else {
                        -g
                    };
                    (g, d_sign as f64 * gh)
                })
                .collect();
            branches.push(Branch { label: BranchLabel::Graph { g_sign, d_sign }, points });
        }
    }
    if e_hat == 1.0 {
        for d_sign in [1i8, -1] {
            let points = (0..n).map(|i| (-PI + 2.0 * PI * i as f64 / (n - 1) as f64, d_sign as f64)).collect();
            branches.push(Branch { label: BranchLabel::Boundary { d_sign }, points });
        }
    }
    Ok(LevelCurve { delta, e_hat, branches, closed: true })
}

/// Shoelace area of a closed polygon.
pub fn shoelace(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = points[i];
        let (x2, y2) = points[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s.abs()
}

/// Area of {Ê₀ < Ê, 0 ≤ Ĝ ≤ 1, g ∈ [0, 2π)} from a polygon through
/// `n_samples` points of the level curve. Independent of the action
/// quadrature, against which it serves as an oracle.
pub fn sublevel_area_shoelace(e_hat: f64, delta: f64, n_samples: usize) -> Result<f64> {
    let lv = Level::new(e_hat, delta)?;
    let curve = sample_level_curve(e_hat, delta, n_samples)?;
    let branch = |gs: i8| -> Vec<(f64, f64)> {
        curve
            .branches
            .iter()
            .find(|b| b.label == BranchLabel::Graph { g_sign: gs, d_sign: 1 })
            .map(|b| b.points.clone())
            .unwrap_or_default()
    };
    if lv.width() == 0.0 {
        return Ok(if e_hat < 1.0 { 0.0 } else { 2.0 * PI });
    }
    let (plus, minus) = (branch(1), branch(-1));
    let mut poly: Vec<(f64, f64)> = plus.clone();
    poly.extend(minus.iter().rev());
    if e_hat < 1.0 {
        if lv.crossing {
            // half oval around (π, 0), closed along Ĝ = 0
            Ok(shoelace(&poly))
        } else {
            // rotational curve: region below it
            poly.push((2.0 * PI, 0.0));
            poly.push((0.0, 0.0));
            let mut v = vec![(0.0, lv.gmin)];
            v.extend(poly);
            Ok(shoelace(&v))
        }
    } else {
        // loop around the maximum; the sublevel set is its complement
        Ok(2.0 * PI - shoelace(&poly))
    }
}

/// Monte-Carlo estimate of the same area, from `n` seeded samples.
pub fn sublevel_area_monte_carlo(e_hat: f64, delta: f64, n: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let g = rng.gen_range(0.0..2.0 * PI);
        let gh: f64 = rng.gen_range(0.0..1.0);
        if e_hat0(gh, g, delta) < e_hat {
            hits += 1;
        }
    }
    2.0 * PI * hits as f64 / n as f64
}

/// Level of the μ > 0 integrals (J, E) on the Delaunay variables at ℓ = 0.
fn graph_residual(
    lambda: f64,
    g_big: f64,
    g: f64,
    j: f64,
    e: f64,
    r_prime: f64,
    mu: f64,
    masses: &MassModel,
) -> [f64; 2] {
    let (m, big_m) = (masses.reduced_inner(), masses.grav_inner());
    let k = m * m * big_m;
    let a = lambda * lambda / k;
    let ecc = (1.0 - (g_big / lambda).powi(2)).max(0.0).sqrt();
    let rho = a * (1.0 - ecc);
    let d = (r_prime * r_prime + 2.0 * r_prime * rho * g.cos() + rho * rho).sqrt();
    let j0 = -m * m * m * big_m * big_m / (2.0 * lambda * lambda);
    [
        j0 - mu * m * big_m / d - j,
        g_big * g_big + k * r_prime * ecc * g.cos() + mu * k * r_prime * (r_prime + rho * g.cos()) / d - e,
    ]
}

/// Residual of the C̄₁ equations at mean anomaly ℓ, with g = (1 − σ)π/2,
/// so cos g = σ.
fn graph1_residual(
    lambda: f64,
    g_big: f64,
    ell: f64,
    sigma: f64,
    j: f64,
    e: f64,
    r_prime: f64,
    mu: f64,
    masses: &MassModel,
) -> Result<[f64; 2]> {
    let (m, big_m) = (masses.reduced_inner(), masses.grav_inner());
    let k = m * m * big_m;
    let a = lambda * lambda / k;
    let ecc = (1.0 - (g_big / lambda).powi(2)).max(0.0).sqrt();
    let xi = solve_kepler(ecc, ell)?;
    let nu = true_anomaly(ecc, xi);
    let rho = 1.0 - ecc * xi.cos();
    let d = (r_prime * r_prime + 2.0 * r_prime * sigma * a * rho * nu.cos() + a * a * rho * rho).sqrt();
    let j0 = -m * m * m * big_m * big_m / (2.0 * lambda * lambda);
    Ok([
        j0 - mu * m * big_m / d - j,
        g_big * g_big + sigma * k * r_prime * ecc
            + mu * k * r_prime * (r_prime + sigma * a * rho * nu.cos()) / d
            - e,
    ])
}

/// Newton on a 2×2 system with a central-difference Jacobian.
fn newton2<F: Fn([f64; 2]) -> Result<[f64; 2]>>(f: F, mut z: [f64; 2], tol: f64) -> Result<[f64; 2]> {
    for _ in 0..60 {
        let r = f(z)?;
        if r[0].abs().max(r[1].abs()) <= tol {
            return Ok(z);
        }
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = 1e-7 * z[c].abs().max(1.0);
            let mut zp = z;
            zp[c] += h;
            let mut zm = z;
            zm[c] -= h;
            let (fp, fm) = (f(zp)?, f(zm)?);
            for row in 0..2 {
                jac[row][c] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence(format!("singular Jacobian at {z:?}")));
        }
        let dz0 = (r[0] * jac[1][1] - r[1] * jac[0][1]) / det;
        let dz1 = (jac[0][0] * r[1] - jac[1][0] * r[0]) / det;
        z = [z[0] - dz0, z[1] - dz1];
        if !(z[0].is_finite() && z[1].is_finite()) {
            return Err(Error::NoConvergence("Newton iterate left the domain".into()));
        }
    }
    let r = f(z)?;
    if r[0].abs().max(r[1].abs()) <= 10.0 * tol {
        return Ok(z);
    }
    Err(Error::NoConvergence(format!("Newton stalled at {z:?} with residual {r:?}")))
}

/// Number of doublings used to reach the target μ from μ = 0.
const MU_DOUBLINGS: u32 = 10;
const GRAPH_TOL: f64 = 1e-13;

/// Projected μ > 0 curves: C̄₁ in (ℓ, Λ) and C̄₂ in (g, Ĝ = G/Λ₀(J)).
#[derive(Debug, Clone, PartialEq)]
pub struct MuLevelCurves {
    /// (ℓ, Λ, G) samples of C̄₁.
    pub c1: Vec<(f64, f64, f64)>,
    /// C̄₂ as a level curve in (g, Ĝ), branch by branch.
    pub c2: LevelCurve,
    /// Λ along the C̄₂ samples, aligned with `c2.points()`.
    pub c2_lambda: Vec<f64>,
    pub max_residual: f64,
}

/// Continues the μ = 0 curves of the level (J, E) to the given μ by Newton
/// steps in μ = 0, μ/2¹⁰, …, μ/2, μ. `sigma` selects the reference line
/// g = (1 − σ)π/2 of C̄₁.
pub fn mu_level_curves(
    j_target: f64,
    e_target: f64,
    r_prime: f64,
    mu: f64,
    sigma: i8,
    masses: &MassModel,
    n_samples: usize,
) -> Result<MuLevelCurves> {
    let pp = PortraitParams::from_integrals(j_target, e_target, r_prime, masses)?;
    let base = sample_level_curve(pp.e_hat, pp.delta, n_samples)?;
    let l0 = pp.lambda;
    let lv = Level::new(pp.e_hat, pp.delta)?;
    let mus: Vec<f64> =
        (0..=MU_DOUBLINGS).map(|i| mu / 2f64.powi((MU_DOUBLINGS - i) as i32)).collect();

    let mut c2 = base.clone();
    let mut c2_lambda = Vec::new();
    let mut max_residual: f64 = 0.0;
    for branch in &mut c2.branches {
        if !matches!(branch.label, BranchLabel::Graph { .. }) {
            continue;
        }
        let solved: Vec<Result<(f64, f64, f64, f64)>> = branch
            .points
            .par_iter()
            .map(|&(g0, gh0)| {
                // keep fixed the coordinate along which the level is a graph
                let dg = (pp.delta * (1.0 - gh0 * gh0).max(0.0).sqrt() * g0.sin()).abs();
                let dgh = (2.0 * gh0 - pp.delta * gh0 * g0.cos() / (1.0 - gh0 * gh0).max(1e-300).sqrt()).abs();
                let fix_g = dgh >= dg;
                let mut z = if fix_g { [l0, gh0 * l0] } else { [l0, g0] };
                for &m in &mus {
                    z = newton2(
                        |z| {
                            Ok(if fix_g {
                                graph_residual(z[0], z[1], g0, j_target, e_target, r_prime, m, masses)
                            } else {
                                graph_residual(z[0], gh0 * l0, z[1], j_target, e_target, r_prime, m, masses)
                            })
                        },
                        z,
                        GRAPH_TOL,
                    )
                    .map_err(|e| Error::NoConvergence(format!("continuation from (g, Ĝ) = ({g0}, {gh0}) at μ = {m}: {e}")))?;
                }
                let (lam, gbig, g) = if fix_g { (z[0], z[1], g0) } else { (z[0], gh0 * l0, z[1]) };
                let r = graph_residual(lam, gbig, g, j_target, e_target, r_prime, mu, masses);
                Ok((g, gbig / l0, lam, r[0].abs().max(r[1].abs())))
            })
            .collect();
        let mut pts = Vec::with_capacity(solved.len());
        for s in solved {
            let (g, gh, lam, res) = s?;
            pts.push((g, gh));
            c2_lambda.push(lam);
            max_residual = max_residual.max(res);
        }
        branch.points = pts;
    }

    let sig = sigma as f64;
    let g_ref = if sigma < 0 { PI } else { 0.0 };
    let seed_gh = if lv.crossing || sigma < 0 { lv.gmax } else { lv.gmax.max(lv.gmin) };
    debug_assert!((e_hat0(seed_gh, g_ref, pp.delta) - pp.e_hat).abs() < 1e-8);
    let c1: Vec<Result<(f64, f64, f64, f64)>> = (0..n_samples.max(2))
        .into_par_iter()
        .map(|i| {
            let ell = 2.0 * PI * i as f64 / n_samples.max(2) as f64;
            let mut z = [l0, seed_gh * l0];
            for &m in &mus {
                z = newton2(|z| graph1_residual(z[0], z[1], ell, sig, j_target, e_target, r_prime, m, masses), z, GRAPH_TOL)?;
            }
            let r = graph1_residual(z[0], z[1], ell, sig, j_target, e_target, r_prime, mu, masses)?;
            Ok((ell, z[0], z[1], r[0].abs().max(r[1].abs())))
        })
        .collect();
    let mut c1_pts = Vec::new();
    for s in c1 {
        let (ell, lam, gbig, res) = s?;
        c1_pts.push((ell, lam, gbig));
        max_residual = max_residual.max(res);
    }
    Ok(MuLevelCurves { c1: c1_pts, c2, c2_lambda, max_residual })
}

/// Symmetric Hausdorff distance between two point clouds.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let one_side = |p: &[(f64, f64)], q: &[(f64, f64)]| {
        p.par_iter()
            .map(|&(x, y)| q.iter().map(|&(u, v)| (x - u).hypot(y - v)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_side(a, b).max(one_side(b, a))
}

/// Regime grid over δ × Ê, rows in input order.
pub fn portrait_grid(deltas: &[f64], e_hats_per_delta: usize) -> Vec<(f64, f64, Regime)> {
    deltas
        .par_iter()
        .flat_map_iter(|&d| {
            let lo = -d;
            let hi = 1.0 + d * d / 4.0;
            let n = e_hats_per_delta.max(2);
            (0..n).filter_map(move |i| {
                let e = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                classify(e, d).ok().map(|c| (d, e, c.regime))
            })
        })
        .collect()
}

pub fn write_portrait_grid_csv<W: Write>(w: W, rows: &[(f64, f64, Regime)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["delta", "E_hat", "regime"])?;
    for (d, e, r) in rows {
        wr.write_record([d.to_string(), e.to_string(), r.tag().to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Two-column (g, G_hat) file; branches are separated by their order.
pub fn write_level_curve_csv<W: Write>(w: W, curve: &LevelCurve) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["g", "G_hat"])?;
    for &(g, gh) in curve.points() {
        wr.write_record([g.to_string(), gh.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
