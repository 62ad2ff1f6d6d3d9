//! Acceptance criteria 1–10. Runs the criteria in parallel and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use euler3b::action_quadrature::{dg0_scaled, g0_action, g0_scaled, j_of_l0};
use euler3b::collision::{focal_configuration, sweep_exclusion, DEFAULT_SAFETY};
use euler3b::coordinate_maps::{
    elliptic_from_state, k_to_cartesian, planar_delaunay_flat, planar_k_flat, symplectic_defect, KCoordinates,
};
use euler3b::dynamics::{euler_drift_report, flow_three_body, flow_two_centre, IntegratorConfig, Trajectory};
use euler3b::experiment::{
    cmd_actions, cmd_budget, cmd_collision, cmd_normalform, cmd_portrait, cmd_simulate, separatrix_areas, ExperimentConfig,
};
use euler3b::integrals::{
    elliptic_euler_integral, elliptic_hamiltonian, euler_decomposition, euler_integral_cartesian, euler_integral_k,
    euler_integral_symmetric, integral_values, to_two_centre_frame, two_centre_energy, two_centre_energy_k,
};
use euler3b::kepler::{anomalies_from_mean, state_from_elements};
use euler3b::normal_form::{
    desk_case, homological_residual, homological_solve, iterative_step, normal_form_n, Constants, FrequencyData, StepVariant,
};
use euler3b::phase_portrait::{classify, critical_points, g_hat_pm, hausdorff, mu_level_curves, sample_level_curve, Regime};
use euler3b::series::random_series;
use euler3b::{CartesianState, Dim, MassModel, Vec3, Widths};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn fail(e: impl std::fmt::Display) -> Outcome {
    (false, format!("error: {e}"))
}

fn elements_state(masses: &MassModel, a: f64, e: f64, ell: f64, g_peri: f64, x_prime: Vec3) -> CartesianState {
    let lam = masses.reduced_inner() * (masses.grav_inner() * a).sqrt();
    let el = anomalies_from_mean(lam, lam * (1.0 - e * e).sqrt(), ell, g_peri, masses).unwrap();
    let (y, x) = state_from_elements(&el, &Matrix3::identity(), masses);
    CartesianState { y_prime: Vec3::zeros(), y, x_prime, x, dim: Dim::Planar }
}

fn criterion1() -> Outcome {
    let t0 = Instant::now();
    let m = MassModel::new(1.0, 1e-3, 0.0).unwrap();
    let a = 1.0;
    let s0 = elements_state(&m, a, 0.3, 0.3, 1.0, Vec3::new(4.0, 0.0, 0.0));
    let period = TAU * a.powf(1.5) / m.grav_inner().sqrt();
    let traj = match flow_two_centre(&s0, &m, &IntegratorConfig::rk87(1e-12, 1000.0 * period, 10.0 * period)) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let (j0, e0) = (traj.samples[0].integrals.j, traj.samples[0].integrals.e);
    let rel_j = traj.samples.iter().map(|s| (s.integrals.j - j0).abs()).fold(0.0, f64::max) / j0.abs();
    // E is not sign-definite: its drift is measured against 𝗆²ℳ|x′|
    let de = traj.samples.iter().map(|s| (s.integrals.e - e0).abs()).fold(0.0, f64::max);
    let rel_e = de / (m.kepler_k() * s0.x_prime.norm());
    let secs = t0.elapsed().as_secs_f64();
    (
        rel_j < 1e-8 && rel_e < 1e-8 && traj.truncated.is_none() && secs < 60.0,
        format!(
            "1000 inner periods, rel drift J {rel_j:.2e}, E {rel_e:.2e} (< 1e-8; |ΔE|/|E(0)| = {:.2e} with E(0) = {e0:.4}), {secs:.2} s",
            de / e0.abs()
        ),
    )
}

/// The bundled scenario at the two values of ε.
fn criterion2_runs() -> Vec<(f64, MassModel, euler3b::Result<Trajectory>, f64)> {
    [1e-3, 5e-4]
        .iter()
        .map(|&eps| {
            let t0 = Instant::now();
            let mut cfg = ExperimentConfig::default();
            cfg.masses.eps = eps;
            let (s0, m, icfg) = cfg.run_setup().unwrap();
            let tr = flow_three_body(&s0, &m, &icfg, true);
            (eps, m, tr, t0.elapsed().as_secs_f64())
        })
        .collect()
}

fn criterion2(runs: &[(f64, MassModel, euler3b::Result<Trajectory>, f64)]) -> Outcome {
    let mut drifts = Vec::new();
    for (_, m, tr, _) in runs {
        match tr.as_ref().map_err(|e| e.to_string()).and_then(|t| euler_drift_report(t, m).map_err(|e| e.to_string())) {
            Ok(rep) => drifts.push(rep.max_drift),
            Err(e) => return fail(e),
        }
    }
    let ratio = drifts[0] / drifts[1];
    let secs: f64 = runs.iter().map(|r| r.3).sum();
    (
        (3.0..=5.0).contains(&ratio) && secs < 300.0,
        format!("T = 50 outer periods, max |ΔE| {:.3e} vs {:.3e}, ratio {ratio:.3} (in [3, 5]), {secs:.2} s", drifts[0], drifts[1]),
    )
}

fn criterion3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [0.5, 1.0, 1.5] {
        let [pm, p0, pp] = critical_points(d).unwrap();
        worst = worst.max((pm.value + d).abs()).max((p0.value - d).abs()).max((pp.value - (1.0 + d * d / 4.0)).abs());
        let (m1, p1) = g_hat_pm(d, d).unwrap();
        worst = worst.max(m1.abs()).max((p1 - d * (2.0 - d)).abs());
        let (m2, p2) = g_hat_pm(1.0, d).unwrap();
        worst = worst.max((p2 - 1.0).abs()).max((m2 - (1.0 - d * d)).abs());
        // regimes switch exactly at the critical values
        let top = 1.0 + d * d / 4.0;
        let at = |e: f64| classify(e, d).map(|c| c.regime).ok();
        ok &= at(d) == Some(Regime::Separatrix0);
        ok &= at(1.0) == Some(if d == 1.0 { Regime::Separatrix0 } else { Regime::CurveE1 });
        ok &= at(top) == Some(Regime::MaximumPoint);
        ok &= at(-d - 1e-12).is_none() && at(top + 1e-12).is_none();
        for b in [d, 1.0, top] {
            for e in [b - 1e-9, b + 1e-9] {
                if e < top {
                    ok &= !matches!(at(e), Some(Regime::Separatrix0 | Regime::CurveE1 | Regime::MaximumPoint) | None);
                }
            }
        }
        let (a0, a1) = separatrix_areas(d, 20000).unwrap();
        let nest = if d < 1.0 {
            a0 < a1 - 1e-6
        } else if d == 1.0 {
            (a0 - a1).abs() <= 1e-6
        } else {
            a1 < a0 - 1e-6
        };
        ok &= nest;
        notes.push(format!("δ={d}: area S0 {a0:.6} S1 {a1:.6}"));
    }
    ok &= worst <= 1e-12;
    (ok, format!("anchors max error {worst:.1e}, regime switches exact, nesting {}", notes.join(", ")))
}

fn criterion4() -> Outcome {
    let m = MassModel::new(1.0, 1e-3, 1e-2).unwrap();
    let lam = 1.3;
    let j = j_of_l0(lam, &m);
    let mut end_err: f64 = 0.0;
    for d in [0.5, 1.0, 1.5] {
        let rp = d * lam * lam / m.kepler_k();
        let lo = g0_action(j, -d * lam * lam, rp, &m).unwrap().g0_action;
        let hi = g0_action(j, (1.0 + d * d / 4.0) * lam * lam, rp, &m).unwrap().g0_action;
        end_err = end_err.max(lo.abs()).max((hi - lam).abs());
    }
    let mut jump: f64 = 0.0;
    for d in [0.5, 1.5] {
        for at in [d, 1.0] {
            let rp = d * lam * lam / m.kepler_k();
            let g = |e: f64| g0_action(j, e * lam * lam, rp, &m).unwrap().g0_action;
            jump = jump.max((g(at + 1e-6) - g(at - 1e-6)).abs());
        }
    }
    // 50 interior points away from the separatrices
    let mut fd_err: f64 = 0.0;
    let mut count = 0;
    for d in [0.5, 1.5] {
        let (lo, hi) = (-d, 1.0 + d * d / 4.0);
        let grid = (1..40).map(|i| lo + (hi - lo) * i as f64 / 40.0);
        for e in grid.filter(|e| (e - d).abs() > 0.02 && (e - 1.0).abs() > 0.02).take(25) {
            let h = 1e-5;
            let fd = (g0_scaled(e + h, d).unwrap() - g0_scaled(e - h, d).unwrap()) / (2.0 * h);
            let an = dg0_scaled(e, d).unwrap();
            fd_err = fd_err.max((fd - an).abs() / an.abs());
            count += 1;
        }
    }
    let mut area_err: f64 = 0.0;
    for (e, d) in [(0.25, 0.5), (0.7, 0.5), (1.03, 0.5), (1.2, 1.5), (1.55, 1.5), (0.0, 1.0)] {
        let q = g0_scaled(e, d).unwrap();
        let s = euler3b::phase_portrait::sublevel_area_shoelace(e, d, 20000).unwrap() / TAU;
        area_err = area_err.max((q - s).abs() / q);
    }
    (
        end_err < 1e-8 && jump < 1e-4 * lam && fd_err < 1e-6 && area_err < 1e-6 && count == 50,
        format!(
            "endpoints {end_err:.1e}, jump {jump:.1e} (< {:.1e}), derivative vs FD {fd_err:.1e} at {count} points, shoelace {area_err:.1e}",
            1e-4 * lam
        ),
    )
}

fn criterion5() -> Outcome {
    let m = MassModel::new(1.0, 0.01, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let del = planar_delaunay_flat(&m);
    let kmap = planar_k_flat(&m, 1);
    let (mut wd, mut wk): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let lam = rng.gen_range(0.8..1.5);
        let z = [lam, lam * rng.gen_range(0.3..0.95), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        wd = wd.max(symplectic_defect(&del, &z, 1e-6));
        let lam = rng.gen_range(0.8..1.5);
        let z = [
            rng.gen_range(1.5..3.0),
            lam * rng.gen_range(0.3..0.95),
            lam,
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
            rng.gen_range(-PI..PI),
            rng.gen_range(2.0..5.0),
        ];
        wk = wk.max(symplectic_defect(&kmap, &z, 1e-6));
    }
    (wd < 1e-6 && wk < 1e-6, format!("max |JᵀΩJ − Ω| Delaunay {wd:.1e}, K {wk:.1e} at 50 points each"))
}

fn criterion6() -> Outcome {
    let m = MassModel::new(1.0, 0.02, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut ek, mut jk, mut ee, mut je): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut offsets = Vec::new();
    let mm = m.reduced_inner();
    for _ in 0..100 {
        let lambda = rng.gen_range(0.8..1.3);
        let g = lambda * rng.gen_range(0.3..0.95);
        let c = rng.gen_range(1.5..3.0);
        let k = KCoordinates {
            z: c * rng.gen_range(-0.9..0.9),
            c,
            theta: rng.gen_range(-0.9..0.9) * g,
            g,
            lambda,
            r_mom: rng.gen_range(-0.5..0.5),
            zeta: rng.gen_range(-PI..PI),
            g_node: rng.gen_range(-PI..PI),
            theta_angle: rng.gen_range(-PI..PI),
            g_peri: rng.gen_range(-PI..PI),
            ell: rng.gen_range(-PI..PI),
            r_prime: rng.gen_range(3.0..5.0),
        };
        let s = match k_to_cartesian(&k, &m) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        let e_cart = euler_integral_cartesian(&s.y, &s.x, &s.x_prime, &m).unwrap();
        let j_cart = two_centre_energy(&s.y, &s.x, &s.x_prime, &m).unwrap();
        ek = ek.max((e_cart - euler_integral_k(&k, &m).unwrap()).abs());
        jk = jk.max((j_cart - two_centre_energy_k(&k, &m).unwrap()).abs());
        let f = to_two_centre_frame(&s.y, &s.x, &s.x_prime, &m);
        let ec = elliptic_from_state(&f.u, &f.v, &f.v0).unwrap();
        let jbar = elliptic_hamiltonian(&ec, f.m_plus, f.m_minus).unwrap();
        je = je.max((mm * jbar - j_cart).abs());
        let ebar = elliptic_euler_integral(&ec, f.m_plus, f.m_minus, jbar).unwrap().e_bar;
        let (_, _, e2) = euler_decomposition(&s.y, &s.x, &s.x_prime, &m).unwrap();
        ee = ee.max((mm * mm * ebar - e2 - e_cart).abs());
        offsets.push(euler_integral_symmetric(&f).unwrap() - ebar);
    }
    let mean = offsets.iter().sum::<f64>() / offsets.len() as f64;
    let spread = offsets.iter().map(|o| (o - mean).abs()).fold(0.0, f64::max);
    let worst = ek.max(jk).max(ee).max(je);
    (
        worst < 1e-9 && spread < 1e-10,
        format!("E, J max chart mismatch {worst:.1e} (K: {ek:.1e}/{jk:.1e}, elliptic: {ee:.1e}/{je:.1e}); symmetric minus elliptic Euler offset {mean:.2e} ± {spread:.1e}"),
    )
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let freq = FrequencyData::frozen(0.8, vec![1.1, -0.4], vec![0.6]).unwrap();
    let mut res: f64 = 0.0;
    for _ in 0..100 {
        let f = random_series(&mut rng, 2, 1, 8, 1.0).average_split().1;
        let phi = homological_solve(&f, &freq).unwrap();
        res = res.max(homological_residual(&phi, &f, &freq).unwrap().norm());
    }
    let desk = desk_case(1.0, 1.0, 200.0, 1e-4).unwrap();
    let consts = Constants::defaults(1, 0);
    let w = desk.f.chart.widths;
    let p = Widths { r: w.r / 6.0, rho: w.rho / 6.0, xi: w.xi / 6.0, s: w.s / 9.0, delta: w.delta / 9.0 };
    let step = match iterative_step(&desk.h0, &desk.f.like(), &desk.f, &desk.freq, &p, StepVariant::Stronger, &consts) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let c = &step.certificate;
    let halved = c.f_plus_tilde_norm <= 0.5 * c.f_tilde_norm;
    let run = normal_form_n(&desk.h0, &desk.f, &desk.freq, 3, &consts).unwrap();
    let margins = run.assumptions.iter().chain(run.steps.iter().flat_map(|s| s.hypotheses.iter().chain(&s.bounds)));
    let (mut n_checks, mut all_margins) = (0, true);
    for ch in margins {
        n_checks += 1;
        all_margins &= ch.margin().is_finite() && ch.holds();
    }
    (
        res <= 1e-14 && halved && run.failure.is_none() && run.steps.len() == 3 && run.halves_each_step() && all_margins,
        format!(
            "residual {res:.1e} (≤ 1e-14), step ‖f̃₊‖/‖f̃‖ = {:.2e}, N=3 norms {:?}, {n_checks} certified checks with margins",
            c.f_plus_tilde_norm / c.f_tilde_norm,
            run.f_norms.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn criterion8(runs: &[(f64, MassModel, euler3b::Result<Trajectory>, f64)]) -> Outcome {
    let m0 = MassModel::new(1.0, 0.0, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut focal: f64 = 0.0;
    let mut n = 0;
    while n < 100 {
        let (g, gp, ell) = (rng.gen_range(0.2..0.99), rng.gen_range(-3.0..3.0), rng.gen_range(0.0..TAU));
        let s = focal_configuration(1.0, g, gp, ell, &m0).unwrap();
        if (s.x - s.x_prime).norm() < 1e-3 {
            continue;
        }
        let iv = integral_values(&s, &m0).unwrap();
        focal = focal.max((iv.e0 - m0.kepler_k() * s.x_prime.norm()).abs());
        n += 1;
    }
    let mut ok = focal < 1e-10;
    let mut notes = Vec::new();
    for (eps, m, tr, _) in runs {
        let Ok(tr) = tr else { return fail("criterion-2 run failed") };
        let sw = sweep_exclusion(tr, m, DEFAULT_SAFETY).unwrap();
        let th = sw.verdicts[0].1.threshold;
        ok &= !sw.entered_band && sw.max_margin_decay < 0.1 * th;
        notes.push(format!("ε={eps}: decay {:.2e} of threshold, excluded throughout {}", sw.max_margin_decay / th, !sw.entered_band));
    }
    (ok, format!("focal |E0 − 𝗆²ℳr′| {focal:.1e}; {}", notes.join("; ")))
}

fn criterion9() -> Outcome {
    let mut ok = true;
    let (mut res, mut ratio): (f64, f64) = (0.0, 0.0);
    for mu in [1e-5, 1e-4] {
        let m = MassModel::new(1.0, mu, 1e-3).unwrap();
        for (d, eh, sig) in [(0.5, 0.25, -1i8), (0.5, 0.7, -1), (0.5, 1.03, 1), (1.5, 1.2, 1)] {
            let lam = 1.0;
            let j = j_of_l0(lam, &m);
            let rp = d * lam * lam / m.kepler_k();
            match mu_level_curves(j, eh * lam * lam, rp, mu, sig, &m, 200) {
                Ok(o) => {
                    let base = sample_level_curve(eh, d, 200).unwrap();
                    let a: Vec<_> = o.c2.points().copied().collect();
                    let b: Vec<_> = base.points().copied().collect();
                    let h = hausdorff(&a, &b);
                    res = res.max(o.max_residual);
                    ratio = ratio.max(h / mu);
                    ok &= o.max_residual < 1e-10 && h < 100.0 * mu;
                }
                Err(e) => return fail(format!("μ={mu} δ={d} Ê={eh}: {e}")),
            }
        }
    }
    (ok, format!("max graph residual {res:.1e}, max Hausdorff/μ {ratio:.1} (< 100) over 8 levels"))
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn criterion10() -> Outcome {
    let mut cfg = ExperimentConfig { seed: 42, ..ExperimentConfig::default() };
    cfg.integrator.periods = 3.0;
    cfg.integrator.samples_per_period = 8.0;
    let run = |dir: &Path| -> euler3b::Result<()> {
        cmd_simulate(&cfg, dir)?;
        cmd_portrait(&cfg, dir)?;
        cmd_actions(&cfg, dir)?;
        cmd_normalform(&cfg, dir)?;
        cmd_collision(&cfg, dir)?;
        cmd_budget(&cfg, dir)?;
        Ok(())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if let Err(e) = run(a.path()).and_then(|_| run(b.path())) {
        return fail(e);
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    let same = fa == fb && fa.iter().all(|(n, _)| n.ends_with(".csv"));
    (same, format!("{} CSV files from six commands byte-identical across two runs", fa.len()))
}

fn main() -> ExitCode {
    let t0 = Instant::now();
    let results: Vec<(usize, Outcome)> = std::thread::scope(|s| {
        let h28 = s.spawn(|| {
            let runs = criterion2_runs();
            vec![(2, criterion2(&runs)), (8, criterion8(&runs))]
        });
        let h1 = s.spawn(|| vec![(1, criterion1())]);
        let rest = s.spawn(|| {
            vec![
                (3, criterion3()),
                (4, criterion4()),
                (5, criterion5()),
                (6, criterion6()),
                (7, criterion7()),
                (9, criterion9()),
                (10, criterion10()),
            ]
        });
        let mut v: Vec<_> = [h28, h1, rest].into_iter().flat_map(|h| h.join().unwrap_or_else(|_| vec![])).collect();
        v.sort_by_key(|r| r.0);
        v
    });
    let mut all = results.len() == 10;
    for (i, (ok, detail)) in &results {
        all &= ok;
        println!("criterion {i:>2}: {}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} in {:.1} s", if all { "all criteria pass" } else { "FAILED" }, t0.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
