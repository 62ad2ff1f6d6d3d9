//! Configuration-driven experiments: each command reads an
//! [`ExperimentConfig`], writes CSV files into the output directory and
//! returns a short text summary.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::action_quadrature::{action_table, write_action_table_csv};
use crate::collision::{sweep_exclusion, write_verdict_csv, DEFAULT_SAFETY};
use crate::core_model::{CartesianState, MassModel, Vec3};
use crate::dynamics::{euler_drift_report, flow_three_body, flow_two_centre, write_trajectory_csv, IntegratorConfig};
use crate::error::{Error, Result};
use crate::kepler::{anomalies_from_mean, state_from_elements};
use crate::normal_form::{
    desk_case, homological_residual, homological_solve, normal_form_n, theorem5_budget, Constants, FrequencyData,
    Theorem5Inputs,
};
use crate::phase_portrait::{portrait_grid, sample_level_curve, sublevel_area_shoelace, write_level_curve_csv, write_portrait_grid_csv};

pub const BUNDLED_SCENARIO: &str = "sun-earth-asteroid";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub masses: MassConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub portrait: PortraitConfig,
    #[serde(default)]
    pub actions: ActionsConfig,
    #[serde(default)]
    pub normal_form: NormalFormConfig,
    #[serde(default)]
    pub collision: CollisionConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
}

fn default_scenario() -> String {
    BUNDLED_SCENARIO.to_string()
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub m0: f64,
    pub mu: f64,
    pub eps: f64,
}

impl Default for MassConfig {
    fn default() -> Self {
        Self { m0: 1.0, mu: 1e-3, eps: 1e-3 }
    }
}

/// Initial state, either Cartesian or as inner elements with the outer
/// body given in Cartesian form.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    Cartesian { y_prime: [f64; 2], y: [f64; 2], x_prime: [f64; 2], x: [f64; 2] },
    Elements { a: f64, e: f64, ell: f64, g_peri: f64, x_prime: [f64; 2], y_prime: [f64; 2] },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Elements { a: 2.0, e: 0.3, ell: 0.3, g_peri: FRAC_PI_2, x_prime: [1.0, 0.0], y_prime: [0.0, 0.0] }
    }
}

impl InitialConfig {
    pub fn state(&self, masses: &MassModel) -> Result<CartesianState> {
        match *self {
            InitialConfig::Cartesian { y_prime, y, x_prime, x } => Ok(CartesianState::planar(y_prime, y, x_prime, x)),
            InitialConfig::Elements { a, e, ell, g_peri, x_prime, y_prime } => {
                if !(a > 0.0) || !(0.0..1.0).contains(&e) {
                    return Err(Error::Config(format!("need a > 0 and 0 ≤ e < 1, got a = {a}, e = {e}")));
                }
                let lam = masses.reduced_inner() * (masses.grav_inner() * a).sqrt();
                let el = anomalies_from_mean(lam, lam * (1.0 - e * e).sqrt(), ell, g_peri, masses)?;
                let (y, x) = state_from_elements(&el, &Matrix3::identity(), masses);
                Ok(CartesianState {
                    y_prime: Vec3::new(y_prime[0], y_prime[1], 0.0),
                    y,
                    x_prime: Vec3::new(x_prime[0], x_prime[1], 0.0),
                    x,
                    dim: crate::core_model::Dim::Planar,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub tol: f64,
    /// Horizon in outer periods 2π√(r′³/ℳ′) at the initial r′.
    pub periods: f64,
    pub samples_per_period: f64,
    /// Integrate the two-centre flow instead of the full problem.
    pub two_centre: bool,
    pub include_eps2: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { tol: 1e-13, periods: 50.0, samples_per_period: 1.0, two_centre: false, include_eps2: true }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitConfig {
    pub deltas: Vec<f64>,
    pub n_levels: usize,
    pub n_curve: usize,
    /// (δ, Ê) pairs written as separate level-curve files.
    pub level_curves: Vec<[f64; 2]>,
}

impl Default for PortraitConfig {
    fn default() -> Self {
        Self { deltas: vec![0.5, 1.0, 1.5], n_levels: 41, n_curve: 400, level_curves: vec![[0.5, 0.5], [0.5, 1.0], [1.5, 1.2]] }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsConfig {
    pub deltas: Vec<f64>,
    pub n_levels: usize,
}

impl Default for ActionsConfig {
    fn default() -> Self {
        Self { deltas: vec![0.5, 1.5], n_levels: 41 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormConfig {
    pub omega: f64,
    pub omega0: f64,
    pub y0: f64,
    pub eps: f64,
    pub steps: usize,
    /// Random zero-average inputs for the homological residual check.
    pub residual_samples: usize,
}

impl Default for NormalFormConfig {
    fn default() -> Self {
        Self { omega: 1.0, omega0: 1.0, y0: 200.0, eps: 1e-4, steps: 3, residual_samples: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    pub safety: f64,
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self { safety: DEFAULT_SAFETY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub eps: f64,
    pub mu: f64,
    pub eta: f64,
    pub kappa: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub eps0: f64,
    pub rho: Option<f64>,
    pub s: Option<f64>,
    pub alpha: Option<f64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let eps: f64 = 1e-8;
        Self {
            eps,
            mu: 1e-8,
            eta: eps.powf(0.4),
            kappa: 1e-8,
            rho_minus: 0.5,
            rho_plus: 2.0,
            eps0: 1e-2,
            rho: None,
            s: None,
            alpha: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Built-in scenario by name.
    pub fn scenario(name: &str) -> Result<Self> {
        match name {
            BUNDLED_SCENARIO => Ok(Self::default()),
            "two-centre" => {
                let mut c = Self { scenario: name.to_string(), ..Self::default() };
                c.masses.eps = 0.0;
                c.initial = InitialConfig::Elements { a: 1.0, e: 0.3, ell: 0.3, g_peri: 1.0, x_prime: [4.0, 0.0], y_prime: [0.0, 0.0] };
                c.integrator = IntegratorSection { tol: 1e-12, periods: 125.0, samples_per_period: 1.0, two_centre: true, include_eps2: false };
                Ok(c)
            }
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mass_model()?;
        let i = &self.integrator;
        if !(i.tol > 0.0 && i.periods > 0.0 && i.samples_per_period > 0.0) {
            return Err(Error::Config("integrator tol, periods and samples_per_period must be positive".into()));
        }
        if self.portrait.n_levels < 2 || self.actions.n_levels < 2 || self.portrait.n_curve < 2 {
            return Err(Error::Config("grids need at least two points".into()));
        }
        if self.portrait.deltas.iter().chain(&self.actions.deltas).any(|d| !(*d > 0.0)) {
            return Err(Error::Config("δ values must be positive".into()));
        }
        if self.normal_form.steps == 0 {
            return Err(Error::Config("normal_form.steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn mass_model(&self) -> Result<MassModel> {
        MassModel::new(self.masses.m0, self.masses.mu, self.masses.eps).map_err(|e| Error::Config(e.to_string()))
    }

    /// Initial state, masses and integrator settings of the run.
    pub fn run_setup(&self) -> Result<(CartesianState, MassModel, IntegratorConfig)> {
        let m = self.mass_model()?;
        let s0 = self.initial.state(&m)?;
        let rp = s0.x_prime.norm();
        let period = 2.0 * PI * (rp.powi(3) / m.grav_outer()).sqrt();
        let i = &self.integrator;
        let cfg = IntegratorConfig::rk87(i.tol, i.periods * period, period / i.samples_per_period);
        Ok((s0, m, cfg))
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: default_scenario(),
            seed: 0,
            output_dir: default_out(),
            masses: MassConfig::default(),
            initial: InitialConfig::default(),
            integrator: IntegratorSection::default(),
            portrait: PortraitConfig::default(),
            actions: ActionsConfig::default(),
            normal_form: NormalFormConfig::default(),
            collision: CollisionConfig::default(),
            budget: BudgetConfig::default(),
        }
    }
}

/// Writes through a temporary file and renames it into place.
fn write_atomic(dir: &Path, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    f(&mut buf)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

fn key_value_csv(rows: &[(String, String)]) -> impl FnOnce(&mut Vec<u8>) -> Result<()> + '_ {
    move |buf| {
        let mut wr = csv::Writer::from_writer(buf);
        wr.write_record(["key", "value"])?;
        for (k, v) in rows {
            wr.write_record([k, v])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn simulate_trajectory(cfg: &ExperimentConfig) -> Result<(crate::dynamics::Trajectory, MassModel)> {
    let (s0, m, icfg) = cfg.run_setup()?;
    let traj = if cfg.integrator.two_centre {
        flow_two_centre(&s0, &m, &icfg)?
    } else {
        flow_three_body(&s0, &m, &icfg, cfg.integrator.include_eps2)?
    };
    Ok((traj, m))
}

/// Trajectory and drift table of E.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let (traj, m) = simulate_trajectory(cfg)?;
    let rep = euler_drift_report(&traj, &m)?;
    write_atomic(out, "trajectory.csv", |b| write_trajectory_csv(b, &traj))?;
    write_atomic(out, "drift.csv", |b| {
        let mut wr = csv::Writer::from_writer(b);
        wr.write_record(["t", "E_drift"])?;
        for (t, d) in &rep.table {
            wr.write_record([t.to_string(), d.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    let j0 = traj.samples[0].integrals.j;
    let j_drift = traj.samples.iter().map(|s| (s.integrals.j - j0).abs()).fold(0.0, f64::max);
    Ok(format!(
        "simulate {}: {} samples, {} steps, max |ΔE| = {:.3e} (normalized {:.3e}), max |ΔJ| = {:.3e}, max |ΔH| = {:.3e}{}",
        cfg.scenario,
        traj.samples.len(),
        traj.steps,
        rep.max_drift,
        rep.normalized,
        j_drift,
        rep.max_energy_drift,
        if traj.truncated.is_some() { ", truncated at a close approach" } else { "" }
    ))
}

/// Sublevel areas of the two separatrix levels Ê = δ and Ê = 1.
pub fn separatrix_areas(delta: f64, n: usize) -> Result<(f64, f64)> {
    Ok((sublevel_area_shoelace(delta, delta, n)?, sublevel_area_shoelace(1.0, delta, n)?))
}

/// Regime grid, level-curve files and the separatrix nesting table.
pub fn cmd_portrait(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let p = &cfg.portrait;
    let grid = portrait_grid(&p.deltas, p.n_levels);
    write_atomic(out, "portrait_grid.csv", |b| write_portrait_grid_csv(b, &grid))?;
    for &[d, e] in &p.level_curves {
        let curve = sample_level_curve(e, d, p.n_curve)?;
        write_atomic(out, &format!("level_curve_delta{d}_E{e}.csv"), |b| write_level_curve_csv(b, &curve))?;
    }
    let mut rows = Vec::new();
    for &d in &p.deltas {
        let (a0, a1) = separatrix_areas(d, p.n_curve * 10)?;
        let nesting = if (a0 - a1).abs() <= 1e-6 * a1.abs().max(1.0) {
            "coincide"
        } else if a0 < a1 {
            "S0 inner"
        } else {
            "S1 inner"
        };
        rows.push((d, a0, a1, nesting));
    }
    write_atomic(out, "separatrix_nesting.csv", |b| {
        let mut wr = csv::Writer::from_writer(b);
        wr.write_record(["delta", "area_S0", "area_S1", "nesting"])?;
        for (d, a0, a1, n) in &rows {
            wr.write_record([d.to_string(), a0.to_string(), a1.to_string(), n.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    let mut s = format!("portrait: {} grid cells", grid.len());
    for (d, _, _, n) in &rows {
        write!(s, "; δ = {d}: {n}").unwrap();
    }
    Ok(s)
}

/// 𝒢₀ table on an even Ê grid per δ, strictly inside the level range.
pub fn cmd_actions(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let a = &cfg.actions;
    let mut pts = Vec::new();
    for &d in &a.deltas {
        let (lo, hi) = (-d, 1.0 + d * d / 4.0);
        for i in 0..a.n_levels {
            pts.push((d, lo + (hi - lo) * i as f64 / (a.n_levels - 1) as f64));
        }
    }
    let rows = action_table(&pts)?;
    write_atomic(out, "actions.csv", |b| write_action_table_csv(b, &rows))?;
    Ok(format!("actions: {} rows over δ ∈ {:?}", rows.len(), a.deltas))
}

/// Desk-case normal form with per-step certificates.
pub fn cmd_normalform(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let nf = &cfg.normal_form;
    let desk = desk_case(nf.omega, nf.omega0, nf.y0, nf.eps)?;
    let consts = Constants::defaults(1, 0);
    let run = normal_form_n(&desk.h0, &desk.f, &desk.freq, nf.steps, &consts)?;
    let mut rows: Vec<[String; 6]> = Vec::new();
    for c in &run.assumptions {
        rows.push(["0".into(), "assumption".into(), c.name.clone(), c.lhs.to_string(), c.rhs.to_string(), c.holds().to_string()]);
    }
    for (j, st) in run.steps.iter().enumerate() {
        for (kind, list) in [("hypothesis", &st.hypotheses), ("bound", &st.bounds)] {
            for c in list {
                rows.push([
                    (j + 1).to_string(),
                    kind.into(),
                    c.name.clone(),
                    c.lhs.to_string(),
                    c.rhs.to_string(),
                    c.holds().to_string(),
                ]);
            }
        }
    }
    write_atomic(out, "normalform_certificates.csv", |b| {
        let mut wr = csv::Writer::from_writer(b);
        wr.write_record(["step", "kind", "check", "lhs", "rhs", "holds"])?;
        for r in &rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    write_atomic(out, "normalform_norms.csv", |b| {
        let mut wr = csv::Writer::from_writer(b);
        wr.write_record(["step", "f_norm"])?;
        for (j, n) in run.f_norms.iter().enumerate() {
            wr.write_record([j.to_string(), n.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    // seeded homological residual check on random zero-average inputs
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let freq = FrequencyData::frozen(0.8, vec![1.1, -0.4], vec![0.6])?;
    let mut worst: f64 = 0.0;
    for _ in 0..nf.residual_samples {
        let f = crate::series::random_series(&mut rng, 2, 1, 8, 1.0).average_split().1;
        let phi = homological_solve(&f, &freq)?;
        worst = worst.max(homological_residual(&phi, &f, &freq)?.norm());
    }
    let mut s = format!(
        "normalform: {} of {} steps, norms {:?}, halving {}, max homological residual {:.2e}",
        run.steps.len(),
        nf.steps,
        run.f_norms.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
        run.halves_each_step(),
        worst
    );
    if let Some(e) = &run.failure {
        write!(s, ", stopped: {e}").unwrap();
    }
    Ok(s)
}

/// Exclusion verdicts along the configured run.
pub fn cmd_collision(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let (traj, m) = simulate_trajectory(cfg)?;
    let sweep = sweep_exclusion(&traj, &m, cfg.collision.safety)?;
    write_atomic(out, "collision.csv", |b| write_verdict_csv(b, &sweep))?;
    let th = sweep.verdicts[0].1.threshold;
    Ok(format!(
        "collision: {} samples, entered band {}, max margin decay {:.3e} ({:.3} of threshold), closest approach {:.4}",
        sweep.verdicts.len(),
        sweep.entered_band,
        sweep.max_margin_decay,
        sweep.max_margin_decay / th,
        sweep.closest_approach
    ))
}

/// Stability-time budget for the configured three-body parameters.
pub fn cmd_budget(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let b = &cfg.budget;
    let inp = Theorem5Inputs {
        eps: b.eps,
        mu: b.mu,
        eta: b.eta,
        kappa: b.kappa,
        rho_minus: b.rho_minus,
        rho_plus: b.rho_plus,
        eps0: b.eps0,
        rho: b.rho,
        s: b.s,
        alpha: b.alpha,
    };
    let r = theorem5_budget(&inp, Constants::defaults(2, 1).c_n)?;
    let bu = &r.budget;
    let i = &bu.inputs;
    let mut rows: Vec<(String, String)> = [
        ("a", i.a),
        ("M0", i.m0),
        ("M1", i.m1),
        ("M", i.m),
        ("M0_prime", i.m0_prime),
        ("E", i.e),
        ("rho", i.rho),
        ("s", i.s),
        ("delta", i.delta),
        ("Delta", i.big_delta),
        ("c", bu.c),
        ("theta0", bu.theta0),
        ("p_star", bu.p_star),
        ("eps", bu.eps),
        ("eps_prime", bu.eps_prime),
        ("T1", bu.t1),
        ("T0", bu.t0),
        ("T0_companion", bu.t0_companion),
        ("log2_horizon", bu.log2_horizon()),
        ("scaling_eps", r.scaling_eps),
        ("scaling_T1", r.scaling_t1),
    ]
    .iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    rows.push(("N".into(), bu.n.to_string()));
    for c in &bu.verdicts {
        rows.push((format!("check: {}", c.name), format!("{} vs {} ({})", c.lhs, c.rhs, c.holds())));
    }
    write_atomic(out, "budget.csv", key_value_csv(&rows))?;
    Ok(format!("budget: T1 = {:.4e}, N = {}, eps = {:.3e}, all checks hold: {}", bu.t1, bu.n, bu.eps, r.verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_parsing() {
        assert!(ExperimentConfig::parse("seed = 3\n[masses]\nm0 = 1.0\nmu = 0.001\neps = 0.001\n").is_ok());
        assert!(matches!(ExperimentConfig::parse("seeds = 3"), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse("[masses]\nm0 = 1.0\nmu = 0.001\n").is_err());
        assert!(ExperimentConfig::parse("[integrator]\ntol = -1.0\nperiods = 1.0\nsamples_per_period = 1.0\ntwo_centre = false\ninclude_eps2 = true\n").is_err());
        let c = ExperimentConfig::parse("[initial]\nkind = \"cartesian\"\ny_prime = [0.0, 0.0]\ny = [0.0, 1.0]\nx_prime = [3.0, 0.0]\nx = [1.0, 0.0]\n").unwrap();
        assert!(matches!(c.initial, InitialConfig::Cartesian { .. }));
        assert!(ExperimentConfig::scenario("nope").is_err());
        assert_eq!(ExperimentConfig::scenario(BUNDLED_SCENARIO).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn bundled_state_has_inner_orbit_enclosing_outer_body() {
        let (s0, m, _) = ExperimentConfig::default().run_setup().unwrap();
        let iv = crate::integrals::integral_values(&s0, &m).unwrap();
        assert!(iv.e > m.kepler_k() * s0.x_prime.norm());
    }

    #[test]
    fn budget_and_portrait_commands() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        let s = cmd_budget(&cfg, dir.path()).unwrap();
        assert!(s.contains("T1"));
        let text = fs::read_to_string(dir.path().join("budget.csv")).unwrap();
        let t1: f64 = text.lines().find(|l| l.starts_with("T1,")).unwrap()[3..].parse().unwrap();
        assert!(t1.is_finite() && t1 > 0.0);
        let s = cmd_portrait(&cfg, dir.path()).unwrap();
        assert!(s.contains("δ = 0.5: S0 inner") && s.contains("δ = 1: coincide") && s.contains("δ = 1.5: S1 inner"), "{s}");
    }
}
