//! Flows of the two-centre Hamiltonian J and of the full Hamiltonian H,
//! with conservation monitors, drift reports and a CSV sink.
//!
//! Phase points are flat vectors (q, p): (x, y) for the two-centre flow
//! and (x′, x, y′, y) for the three-body flow. Both Hamiltonians split as
//! T(p) + V(q), which the symplectic integrator uses directly.

use std::io::Write;

use rayon::prelude::*;

use crate::core_model::{CartesianState, Dim, MassModel, Vec3};
use crate::error::{domain, Error, Exclusion, Result};
use crate::integrals::{integral_values, IntegralValues};

/// Close approaches below this multiple of |x′(0)| stop a run.
pub const CLOSE_APPROACH_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Embedded Runge–Kutta–Fehlberg 8(7), propagating the 8th-order
    /// solution.
    Rk87 { tol: f64 },
    /// Fixed-step 4th-order composition of Störmer–Verlet.
    Splitting { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_max: f64,
    /// Time between recorded samples; the final time is always recorded.
    pub sample_dt: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn rk87(tol: f64, t_max: f64, sample_dt: f64) -> Self {
        Self { method: Method::Rk87 { tol }, t_max, sample_dt, max_steps: 50_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk87 { tol } if !(tol > 0.0) => return domain("tolerance must be positive"),
            Method::Splitting { step } if !(step > 0.0) => return domain("step must be positive"),
            _ => {}
        }
        if !(self.t_max.abs() > 0.0) || !(self.sample_dt > 0.0) {
            return domain("t_max must be non-zero and sample_dt positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: CartesianState,
    pub integrals: IntegralValues,
    pub min_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Set when the run stopped at a close approach: (time, which pair).
    pub truncated: Option<(f64, Exclusion)>,
    pub steps: usize,
    pub rejected: usize,
}

/// A Hamiltonian T(p) + V(q) on a flat (q, p) vector.
pub trait Hamiltonian: Sync {
    fn dof(&self) -> usize;
    fn grad_t(&self, p: &[f64], out: &mut [f64]);
    fn grad_v(&self, q: &[f64], out: &mut [f64]);
    fn energy(&self, z: &[f64]) -> f64;
    fn state(&self, z: &[f64]) -> CartesianState;
    fn masses(&self) -> &MassModel;

    fn rhs(&self, z: &[f64], dz: &mut [f64]) {
        let n = self.dof();
        let (q, p) = z.split_at(n);
        let (dq, dp) = dz.split_at_mut(n);
        self.grad_t(p, dq);
        self.grad_v(q, dp);
        for v in dp.iter_mut() {
            *v = -*v;
        }
    }
}

fn vec_at(z: &[f64], i: usize, d: usize) -> Vec3 {
    let mut v = Vec3::zeros();
    for c in 0..d {
        v[c] = z[i * d + c];
    }
    v
}

fn put(out: &mut [f64], i: usize, d: usize, v: &Vec3) {
    for c in 0..d {
        out[i * d + c] = v[c];
    }
}

fn dim_of(d: usize) -> Dim {
    if d == 2 {
        Dim::Planar
    } else {
        Dim::Spatial
    }
}

/// The two-centre Hamiltonian J with x′ held fixed, on (x, y).
#[derive(Debug, Clone, Copy)]
pub struct TwoCentreSystem {
    pub masses: MassModel,
    pub x_prime: Vec3,
    pub d: usize,
}

impl Hamiltonian for TwoCentreSystem {
    fn dof(&self) -> usize {
        self.d
    }
    fn grad_t(&self, p: &[f64], out: &mut [f64]) {
        let m = self.masses.reduced_inner();
        for (o, v) in out.iter_mut().zip(p) {
            *o = v / m;
        }
    }
    fn grad_v(&self, q: &[f64], out: &mut [f64]) {
        let mm = self.masses.reduced_inner() * self.masses.grav_inner();
        let x = vec_at(q, 0, self.d);
        let dx = x - self.x_prime;
        let g = mm * x / x.norm().powi(3) + self.masses.mu() * mm * dx / dx.norm().powi(3);
        put(out, 0, self.d, &g);
    }
    fn energy(&self, z: &[f64]) -> f64 {
        let s = self.state(z);
        crate::integrals::two_centre_energy(&s.y, &s.x, &s.x_prime, &self.masses).unwrap_or(f64::NAN)
    }
    fn state(&self, z: &[f64]) -> CartesianState {
        CartesianState {
            y_prime: Vec3::zeros(),
            y: vec_at(z, 1, self.d),
            x_prime: self.x_prime,
            x: vec_at(z, 0, self.d),
            dim: dim_of(self.d),
        }
    }
    fn masses(&self) -> &MassModel {
        &self.masses
    }
}

/// The full Hamiltonian H on (x′, x, y′, y). With `include_eps2 = false`
/// the ε² group is dropped.
#[derive(Debug, Clone, Copy)]
pub struct ThreeBodySystem {
    pub masses: MassModel,
    pub d: usize,
    pub include_eps2: bool,
}

impl Hamiltonian for ThreeBodySystem {
    fn dof(&self) -> usize {
        2 * self.d
    }
    fn grad_t(&self, p: &[f64], out: &mut [f64]) {
        let m = &self.masses;
        let eps = m.eps();
        let (yp, y) = (vec_at(p, 0, self.d), vec_at(p, 1, self.d));
        let mut dxp = Vec3::zeros();
        let mut dx = eps * y / m.reduced_inner();
        if self.include_eps2 {
            let c = m.mu() / m.m0();
            dxp = eps * eps * (yp / m.reduced_outer() + c * y);
            dx += eps * eps * c * yp;
        }
        put(out, 0, self.d, &dxp);
        put(out, 1, self.d, &dx);
    }
    fn grad_v(&self, q: &[f64], out: &mut [f64]) {
        let m = &self.masses;
        let eps = m.eps();
        let (xp, x) = (vec_at(q, 0, self.d), vec_at(q, 1, self.d));
        let mm = m.reduced_inner() * m.grav_inner();
        let dx = x - xp;
        let dd3 = dx.norm().powi(3);
        let gxp = m.reduced_outer() * m.grav_outer() * xp / xp.norm().powi(3)
            - eps * m.mu() * mm * dx / dd3;
        let gx = eps * (mm * x / x.norm().powi(3) + m.mu() * mm * dx / dd3);
        put(out, 0, self.d, &gxp);
        put(out, 1, self.d, &gx);
    }
    fn energy(&self, z: &[f64]) -> f64 {
        let s = self.state(z);
        match crate::integrals::hamiltonian_groups(&s, &self.masses) {
            Ok((a, b, c)) => {
                let eps = self.masses.eps();
                a + eps * b + if self.include_eps2 { eps * eps * c } else { 0.0 }
            }
            Err(_) => f64::NAN,
        }
    }
    fn state(&self, z: &[f64]) -> CartesianState {
        CartesianState::from_flat(z, dim_of(self.d))
    }
    fn masses(&self) -> &MassModel {
        &self.masses
    }
}

// Runge–Kutta–Fehlberg 7(8) tableau.
#[cfg(test)]
const C: [f64; 13] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

#[rustfmt::skip]
const A: [[f64; 12]; 13] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0.0, 0.0, 0.0, 0.0],
    [-91.0 / 108.0, 0.0, 0.0, 23.0 / 108.0, -976.0 / 135.0, 311.0 / 54.0, -19.0 / 60.0, 17.0 / 6.0, -1.0 / 12.0, 0.0, 0.0, 0.0],
    [2383.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -301.0 / 82.0, 2133.0 / 4100.0, 45.0 / 82.0, 45.0 / 164.0, 18.0 / 41.0, 0.0, 0.0],
    [3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0, 6.0 / 41.0, 0.0, 0.0],
    [-1777.0 / 4100.0, 0.0, 0.0, -341.0 / 164.0, 4496.0 / 1025.0, -289.0 / 82.0, 2193.0 / 4100.0, 51.0 / 82.0, 33.0 / 164.0, 12.0 / 41.0, 0.0, 1.0],
];

/// 8th-order weights.
const B8: [f64; 13] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// 7th-order weights.
pub const B7: [f64; 13] = [
    41.0 / 840.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    41.0 / 840.0,
    0.0,
    0.0,
];

/// One RKF78 step of an autonomous system. Returns the 8th-order update
/// and writes the difference to the 7th-order one into `err`.
pub fn rkf78_step(
    f: &dyn Fn(&[f64], &mut [f64]),
    z: &[f64],
    h: f64,
    k: &mut [Vec<f64>; 13],
    err: &mut [f64],
) -> Vec<f64> {
    let n = z.len();
    let mut tmp = vec![0.0; n];
    for s in 0..13 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += A[s][j] * kj[i];
            }
            tmp[i] = z[i] + h * acc;
        }
        f(&tmp, &mut k[s]);
    }
    let mut out = z.to_vec();
    for i in 0..n {
        let mut acc = 0.0;
        for s in 0..13 {
            acc += B8[s] * k[s][i];
        }
        out[i] += h * acc;
        err[i] = h * 41.0 / 840.0 * (k[0][i] + k[10][i] - k[11][i] - k[12][i]);
    }
    out
}

/// Smallest pairwise distance among the bodies of a state, and the pair.
fn closest(s: &CartesianState) -> (f64, Exclusion) {
    let a = s.x.norm();
    let b = s.x_prime.norm();
    let c = (s.x - s.x_prime).norm();
    if a <= b && a <= c {
        (a, Exclusion::InnerAtOrigin)
    } else if b <= c {
        (b, Exclusion::OuterAtOrigin)
    } else {
        (c, Exclusion::InnerAtOuter)
    }
}

fn sample<H: Hamiltonian>(sys: &H, t: f64, z: &[f64]) -> Result<TrajectorySample> {
    let state = sys.state(z);
    let mut integrals = integral_values(&state, sys.masses())?;
    integrals.h = sys.energy(z);
    Ok(TrajectorySample { t, state, integrals, min_separation: closest(&state).0 })
}

/// Integrates `sys` from `z0` with the configured method.
pub fn integrate<H: Hamiltonian>(sys: &H, z0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let s0 = sys.state(z0);
    let floor = CLOSE_APPROACH_FACTOR * s0.x_prime.norm();
    s0.validate(floor)?;
    let dir = cfg.t_max.signum();
    let t_end = cfg.t_max.abs();
    let rhs = |z: &[f64], dz: &mut [f64]| {
        sys.rhs(z, dz);
        if dir < 0.0 {
            for v in dz.iter_mut() {
                *v = -*v;
            }
        }
    };
    let n = z0.len();
    let mut z = z0.to_vec();
    let mut t = 0.0;
    let mut samples = vec![sample(sys, 0.0, &z)?];
    let mut next_sample = cfg.sample_dt.min(t_end);
    let mut steps = 0;
    let mut rejected = 0;
    let mut truncated = None;
    let mut k: [Vec<f64>; 13] = std::array::from_fn(|_| vec![0.0; n]);
    let mut err = vec![0.0; n];
    let mut h = match cfg.method {
        Method::Rk87 { .. } => (t_end / 1000.0).min(cfg.sample_dt),
        Method::Splitting { step } => step,
    };
    while t < t_end {
        if steps >= cfg.max_steps {
            return Err(Error::NoConvergence(format!("step budget exhausted at t = {t}")));
        }
        let target = next_sample;
        let hh = h.min(target - t);
        let last = hh >= target - t;
        let znew = match cfg.method {
            Method::Rk87 { tol } => {
                let cand = rkf78_step(&rhs, &z, hh, &mut k, &mut err);
                let mut e: f64 = 0.0;
                for i in 0..n {
                    let sc = tol + tol * z[i].abs().max(cand[i].abs());
                    e = e.max(err[i].abs() / sc);
                }
                if !e.is_finite() {
                    h = hh * 0.1;
                    rejected += 1;
                    steps += 1;
                    continue;
                }
                let fac = if e == 0.0 { 4.0 } else { (0.9 * e.powf(-1.0 / 8.0)).clamp(0.2, 4.0) };
                if e > 1.0 {
                    h = hh * fac;
                    rejected += 1;
                    steps += 1;
                    continue;
                }
                if !last || fac < 1.0 {
                    h = hh * fac;
                }
                cand
            }
            Method::Splitting { .. } => yoshida4(sys, &z, dir * hh),
        };
        steps += 1;
        t = if last { target } else { t + hh };
        z = znew;
        let st = sys.state(&z);
        let (sep, which) = closest(&st);
        if sep <= floor || !sep.is_finite() {
            truncated = Some((dir * t, which));
            samples.push(sample(sys, dir * t, &z)?);
            break;
        }
        if last {
            samples.push(sample(sys, dir * t, &z)?);
            next_sample = (next_sample + cfg.sample_dt).min(t_end);
        }
    }
    Ok(Trajectory { samples, truncated, steps, rejected })
}

/// Yoshida's 4th-order composition of the kick-drift-kick leapfrog.
fn yoshida4<H: Hamiltonian>(sys: &H, z: &[f64], h: f64) -> Vec<f64> {
    let cbrt2 = 2f64.powf(1.0 / 3.0);
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 * w1;
    let mut out = z.to_vec();
    for w in [w1, w0, w1] {
        leapfrog(sys, &mut out, w * h);
    }
    out
}

fn leapfrog<H: Hamiltonian>(sys: &H, z: &mut [f64], h: f64) {
    let n = sys.dof();
    let mut g = vec![0.0; n];
    sys.grad_v(&z[..n], &mut g);
    for i in 0..n {
        z[n + i] -= 0.5 * h * g[i];
    }
    sys.grad_t(&z[n..], &mut g);
    for i in 0..n {
        z[i] += h * g[i];
    }
    sys.grad_v(&z[..n], &mut g);
    for i in 0..n {
        z[n + i] -= 0.5 * h * g[i];
    }
}

fn check_dim(s: &CartesianState) -> usize {
    s.dim_len()
}

/// Flow of J with x′ = s0.x′ fixed. y′ is ignored.
pub fn flow_two_centre(s0: &CartesianState, masses: &MassModel, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let d = check_dim(s0);
    let sys = TwoCentreSystem { masses: *masses, x_prime: s0.x_prime, d };
    let mut z = Vec::with_capacity(2 * d);
    z.extend_from_slice(&s0.x.as_slice()[..d]);
    z.extend_from_slice(&s0.y.as_slice()[..d]);
    integrate(&sys, &z, cfg)
}

/// Flow of H (or of H without its ε² group).
pub fn flow_three_body(
    s0: &CartesianState,
    masses: &MassModel,
    cfg: &IntegratorConfig,
    include_eps2: bool,
) -> Result<Trajectory> {
    let sys = ThreeBodySystem { masses: *masses, d: check_dim(s0), include_eps2 };
    integrate(&sys, &s0.to_flat(), cfg)
}

/// Runs independent three-body flows in parallel; results keep input order.
pub fn sweep_three_body(
    runs: &[(CartesianState, MassModel)],
    cfg: &IntegratorConfig,
) -> Vec<Result<Trajectory>> {
    runs.par_iter().map(|(s, m)| flow_three_body(s, m, cfg, true)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub max_drift: f64,
    /// max_drift / (𝗆²ℳ r′(0))
    pub normalized: f64,
    pub max_energy_drift: f64,
    /// (t, |E(t) − E(0)|)
    pub table: Vec<(f64, f64)>,
}

impl DriftReport {
    /// Drift at the last sample with time ≤ t.
    pub fn drift_at(&self, t: f64) -> f64 {
        self.table.iter().take_while(|(s, _)| *s <= t).last().map_or(0.0, |(_, d)| *d)
    }
}

pub fn euler_drift_report(traj: &Trajectory, masses: &MassModel) -> Result<DriftReport> {
    let first = traj.samples.first().ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let e0 = first.integrals.e;
    let h0 = first.integrals.h;
    let mut max_drift: f64 = 0.0;
    let mut max_h: f64 = 0.0;
    let mut table = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let d = (s.integrals.e - e0).abs();
        max_drift = max_drift.max(d);
        max_h = max_h.max((s.integrals.h - h0).abs());
        table.push((s.t, d));
    }
    let scale = masses.kepler_k() * first.state.x_prime.norm();
    Ok(DriftReport { max_drift, normalized: max_drift / scale, max_energy_drift: max_h, table })
}

/// CSV columns: t, x′ (d), x (d), y′ (d), y (d), J0, J, E, H, min_separation.
pub fn trajectory_header(d: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for name in ["xp", "x", "yp", "y"] {
        for c in 0..d {
            h.push(format!("{name}{}", c + 1));
        }
    }
    h.extend(["J0", "J", "E", "H", "min_separation"].map(String::from));
    h
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let d = traj.samples.first().map_or(2, |s| s.state.dim_len());
    wr.write_record(trajectory_header(d))?;
    for s in &traj.samples {
        let mut row = vec![s.t.to_string()];
        row.extend(s.state.to_flat().iter().map(f64::to_string));
        for v in [s.integrals.j0, s.integrals.j, s.integrals.e, s.integrals.h, s.min_separation] {
            row.push(v.to_string());
        }
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}
