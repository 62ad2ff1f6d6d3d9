//! Normal form for H = h₀(y, I, 𝒥(p, q)) + g + f with a non-periodic pair
//! (y, x): Lie-series queues, the homological equation solved by an
//! integral in x (no small divisors), the iterative step with its
//! certificates, and the stability-time budget.

use num_complex::Complex64;

use crate::core_model::Widths;
use crate::error::{domain, Error, Result};
use crate::series::{Exponent, Monomial, TaylorFourierSeries};

/// Frequencies frozen at the chart center, with their chart sups.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyData {
    pub omega_y: f64,
    pub omega_i: Vec<f64>,
    pub omega_j: Vec<f64>,
    /// sup |1/ω_y| on the chart.
    pub inv_omega_y_sup: f64,
    /// sup ‖ω_I/ω_y‖_∞ on the chart.
    pub omega_i_ratio_sup: f64,
    /// sup ‖ω_J/ω_y‖_∞ on the chart.
    pub omega_j_ratio_sup: f64,
}

impl FrequencyData {
    /// Constant frequencies: the sups are the center values.
    pub fn frozen(omega_y: f64, omega_i: Vec<f64>, omega_j: Vec<f64>) -> Result<Self> {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        Self::with_sups(
            omega_y,
            omega_i.clone(),
            omega_j.clone(),
            1.0 / omega_y.abs(),
            sup(&omega_i) / omega_y.abs(),
            sup(&omega_j) / omega_y.abs(),
        )
    }

    pub fn with_sups(
        omega_y: f64,
        omega_i: Vec<f64>,
        omega_j: Vec<f64>,
        inv_omega_y_sup: f64,
        omega_i_ratio_sup: f64,
        omega_j_ratio_sup: f64,
    ) -> Result<Self> {
        if omega_y == 0.0 || !omega_y.is_finite() || !inv_omega_y_sup.is_finite() {
            return domain("ω_y must not vanish on the chart");
        }
        Ok(Self { omega_y, omega_i, omega_j, inv_omega_y_sup, omega_i_ratio_sup, omega_j_ratio_sup })
    }

    /// λ = (h − j)·ω_J + i k·ω_I.
    pub fn lambda(&self, mono: &Monomial) -> Complex64 {
        let re: f64 = mono.h.iter().zip(&mono.j).zip(&self.omega_j).map(|((h, j), w)| (*h as f64 - *j as f64) * w).sum();
        let im: f64 = mono.k.iter().zip(&self.omega_i).map(|(k, w)| *k as f64 * w).sum();
        Complex64::new(re, im)
    }
}

/// Universal constants of the normal-form estimates. The defaults follow
/// the explicit factors in their derivations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Lie-series constant c̄.
    pub c_bar: f64,
    /// Iterative-step constant c̃.
    pub c_tilde: f64,
    /// Normal-form constant c_{n,m}.
    pub c_nm: f64,
    /// Constant c_n of the stability theorem.
    pub c_n: f64,
}

impl Constants {
    pub fn defaults(n: usize, m: usize) -> Self {
        let c_bar = 2f64.powi((n + 2 * m + 1) as i32);
        let c_tilde = 162.0 * c_bar;
        Self { c_bar, c_tilde, c_nm: 162.0 * c_tilde, c_n: 81.0 * c_tilde }
    }
}

/// φ solving ω_y ∂_x φ + λφ = f̃ term by term with φ(x = 0) = 0.
pub fn homological_solve(f_tilde: &TaylorFourierSeries, freq: &FrequencyData) -> Result<TaylorFourierSeries> {
    if freq.omega_y == 0.0 {
        return domain("ω_y vanishes");
    }
    let wy = freq.omega_y;
    let x_sup = f_tilde.chart.x_sup();
    let mut phi = f_tilde.like();
    // the solver output may exceed the x-degree of the ring
    phi.trunc.x_max = u32::MAX;
    for (mono, &c) in &f_tilde.terms {
        if mono.is_average() {
            return domain("homological equation needs a zero-average right-hand side");
        }
        let lam = freq.lambda(mono);
        let nu = mono.mu.value();
        let alpha = nu + lam / wy;
        let b = mono.b;
        let with = |b2: u32, mu: Complex64| {
            let mut m2 = mono.clone();
            m2.b = b2;
            m2.mu = Exponent::new(mu);
            m2
        };
        if (alpha * x_sup).norm() <= 0.5 {
            // e^{νx}(c/ω_y) Σ_m (−α)^m b! x^{b+m+1}/(b+m+1)!
            let mut coef = c / wy / (b as f64 + 1.0);
            let mut m = 0u32;
            loop {
                phi.add_term(with(b + m + 1, nu), coef);
                m += 1;
                coef *= -alpha / (b + m + 1) as f64;
                if coef.norm() * x_sup.powi((b + m + 1) as i32) <= 1e-18 * c.norm() || m > 200 {
                    break;
                }
            }
        } else {
            // e^{νx}P(x) with ω_y(αP + P′) = c xᵇ, minus P(0)e^{−λx/ω_y}
            let mut coef = c / (wy * alpha);
            for i in 0..=b {
                phi.add_term(with(b - i, nu), coef);
                if i < b {
                    coef *= -((b - i) as f64) / alpha;
                }
            }
            phi.add_term(with(0, -lam / wy), -coef);
        }
    }
    Ok(phi)
}

/// ω_y ∂_x φ + λφ − f̃.
pub fn homological_residual(
    phi: &TaylorFourierSeries,
    f_tilde: &TaylorFourierSeries,
    freq: &FrequencyData,
) -> Result<TaylorFourierSeries> {
    let mut lphi = phi.like();
    for (mono, c) in &phi.terms {
        lphi.terms.insert(mono.clone(), c * freq.lambda(mono));
    }
    let mut lhs = phi.d_x().scale(freq.omega_y.into()).add(&lphi)?;
    lhs.trunc.x_max = u32::MAX;
    lhs.sub(f_tilde)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueResult {
    pub series: TaylorFourierSeries,
    /// Number of powers L_φʲ evaluated.
    pub terms_used: usize,
    /// Norm discarded by truncation over all brackets.
    pub discarded: f64,
    /// Largest observed ratio ‖L^{j+1}g/(j+1)!‖ / ‖Lʲg/j!‖.
    pub max_ratio: f64,
}

const QUEUE_J_MAX: usize = 60;

/// Φ_h g = Σ_{j≥h} L_φʲ g / j!. With `smallness = Some((c̄, d))` the
/// precondition c̄‖φ‖/d < 1 is enforced first.
pub fn lie_queue(
    phi: &TaylorFourierSeries,
    g: &TaylorFourierSeries,
    h: usize,
    smallness: Option<(f64, f64)>,
) -> Result<QueueResult> {
    if let Some((c_bar, d)) = smallness {
        let lhs = c_bar * phi.norm() / d;
        if !(lhs < 1.0) {
            return Err(Error::Divergence(format!("Lie series smallness c̄‖φ‖/d = {lhs} is not below 1")));
        }
    }
    let mut term = g.clone();
    let mut out = g.like();
    let mut discarded = 0.0;
    let mut max_ratio: f64 = 0.0;
    let g_norm = g.norm();
    let mut prev = g_norm;
    let mut growth = 0;
    for j in 0..=QUEUE_J_MAX {
        if j >= h {
            out = out.add(&term)?;
        }
        let tn = term.norm();
        if tn <= 1e-16 * g_norm || term.is_zero() {
            return Ok(QueueResult { series: out, terms_used: j + 1, discarded, max_ratio });
        }
        let (next, d) = phi.bracket(&term)?;
        discarded += d;
        term = next.scale(Complex64::new(1.0 / (j + 1) as f64, 0.0));
        let nn = term.norm();
        let ratio = nn / tn;
        max_ratio = max_ratio.max(ratio);
        growth = if nn > prev { growth + 1 } else { 0 };
        prev = nn;
        if growth >= 3 && j >= 3 {
            return Err(Error::Divergence(format!("Lie series terms grow at order {j}")));
        }
    }
    Err(Error::Divergence(format!("Lie series did not converge in {QUEUE_J_MAX} terms")))
}

/// Image of a point under the time-one map of φ, coordinates
/// (I, φ, y, x, p, q). Each coordinate is advanced by its Lie series.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub i: Vec<f64>,
    pub phi: Vec<f64>,
    pub y: f64,
    pub x: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn time_one_map(phi: &TaylorFourierSeries, z: &PhasePoint) -> Result<PhasePoint> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let cs = |v: &[f64]| v.iter().map(|&t| c(t)).collect::<Vec<_>>();
    let (ci, cphi, cp, cq) = (cs(&z.i), cs(&z.phi), cs(&z.p), cs(&z.q));
    let eval = |s: &TaylorFourierSeries| s.eval(&ci, &cphi, c(z.y), c(z.x), &cp, &cq).re;
    // z₊ − z = Σ_{j≥0} L^j({φ, z}) / (j+1)!
    let incr = |first: TaylorFourierSeries| -> Result<f64> {
        let mut term = first;
        let mut total = 0.0;
        for j in 0..=QUEUE_J_MAX {
            let v = eval(&term) / (j + 1) as f64;
            total += v;
            if term.is_zero() || v.abs() < 1e-18 {
                return Ok(total);
            }
            let (next, _) = phi.bracket(&term)?;
            term = next.scale(c(1.0 / (j + 1) as f64));
        }
        Err(Error::Divergence("coordinate Lie series did not converge".into()))
    };
    // L^j g/(j+1)! = (L^j g/j!)/(j+1): the scale keeps L^j g/j!
    let mut out = z.clone();
    for t in 0..phi.n {
        out.i[t] += incr(phi.d_phi(t).scale(c(-1.0)))?;
        out.phi[t] += incr(phi.d_action(t))?;
    }
    out.y += incr(phi.d_x().scale(c(-1.0)))?;
    out.x += incr(phi.d_y())?;
    for t in 0..phi.m {
        out.q[t] += incr(phi.d_p(t).scale(c(-1.0)))?;
        out.p[t] += incr(phi.d_q(t))?;
    }
    Ok(out)
}

/// One checked inequality lhs < rhs.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.lhs < self.rhs
    }

    /// rhs − lhs.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepVariant {
    /// 2s′ < s, 2δ′ < δ, X‖ω_I/ω_y‖ < s − 2s′, X‖ω_J/ω_y‖ < log(δ/2δ′).
    Basic,
    /// 3s′ < s, 3δ′ < δ, X‖ω_I/ω_y‖ < s′, X‖ω_J/ω_y‖ < δ′/δ.
    Stronger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCertificate {
    pub constants: Constants,
    /// Hypotheses of the step; all hold when the step returns.
    pub hypotheses: Vec<Check>,
    /// Measured quantities compared with the bounds of the lemma; these
    /// are reported, not enforced.
    pub bounds: Vec<Check>,
    pub d: f64,
    pub x_sup: f64,
    pub widths_in: Widths,
    pub widths_out: Widths,
    pub f_norm: f64,
    pub f_tilde_norm: f64,
    pub f_plus_norm: f64,
    pub f_plus_tilde_norm: f64,
    pub phi_norm: f64,
    pub discarded: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub g_plus: TaylorFourierSeries,
    pub f_plus: TaylorFourierSeries,
    pub phi: TaylorFourierSeries,
    pub certificate: StepCertificate,
}

fn require(checks: &[Check]) -> Result<()> {
    for c in checks {
        if !c.holds() {
            return Err(Error::Hypothesis { name: c.name.clone(), lhs: c.lhs, rhs: c.rhs });
        }
    }
    Ok(())
}

fn check(name: &str, lhs: f64, rhs: f64) -> Check {
    Check { name: name.to_string(), lhs, rhs }
}

/// One normalizing step: H = h₀ + g + f ↦ h₀ + (g + f̄) + f₊ with
/// f₊ = f̃ + Φ₁(h₀ + g + f), which equals Φ₂(h₀) + Φ₁(g) + Φ₁(f) plus
/// the part of {φ, h₀} + f̃ not removed by the frozen frequencies.
/// `primed` holds (r′, ρ′, ξ′, s′, δ′); the widths of f are the chart's.
pub fn iterative_step(
    h0: &TaylorFourierSeries,
    g: &TaylorFourierSeries,
    f: &TaylorFourierSeries,
    freq: &FrequencyData,
    primed: &Widths,
    variant: StepVariant,
    consts: &Constants,
) -> Result<StepResult> {
    let w = f.chart.widths;
    let p = primed;
    let x_sup = f.chart.x_sup();
    let has_pq = f.m > 0;
    let wi = x_sup * freq.omega_i_ratio_sup;
    let wj = x_sup * freq.omega_j_ratio_sup;
    let d = if has_pq { (p.rho * p.s).min(p.r * p.xi).min(p.delta * p.delta) } else { (p.rho * p.s).min(p.r * p.xi) };
    let (f_bar, f_tilde) = f.average_split();
    let f_tilde_norm = f_tilde.norm();
    let f_norm = f.norm();

    let mut hyp = vec![check("2r' < r", 2.0 * p.r, w.r), check("2rho' < rho", 2.0 * p.rho, w.rho), check("2xi' < xi", 2.0 * p.xi, w.xi)];
    let (s_plus, delta_plus, s1, delta1) = match variant {
        StepVariant::Basic => {
            hyp.push(check("2s' < s", 2.0 * p.s, w.s));
            hyp.push(check("X|omega_I/omega_y| < s - 2s'", wi, w.s - 2.0 * p.s));
            if has_pq {
                hyp.push(check("2delta' < delta", 2.0 * p.delta, w.delta));
                hyp.push(check("X|omega_J/omega_y| < log(delta/2delta')", wj, (w.delta / (2.0 * p.delta)).ln()));
            }
            let d1 = w.delta * (-wj).exp();
            (w.s - 2.0 * p.s - wi, d1 - 2.0 * p.delta, w.s - wi, d1)
        }
        StepVariant::Stronger => {
            hyp.push(check("3s' < s", 3.0 * p.s, w.s));
            hyp.push(check("X|omega_I/omega_y| < s'", wi, p.s));
            if has_pq {
                hyp.push(check("3delta' < delta", 3.0 * p.delta, w.delta));
                hyp.push(check("X|omega_J/omega_y| < delta'/delta", wj, p.delta / w.delta));
            }
            (w.s - 3.0 * p.s, w.delta - 3.0 * p.delta, w.s - p.s, w.delta - p.delta)
        }
    };
    let (delta_plus, delta1) = if has_pq { (delta_plus, delta1) } else { (w.delta, w.delta) };
    let smallness = consts.c_tilde * x_sup / d * f_tilde_norm * freq.inv_omega_y_sup;
    hyp.push(check("c~ X/d |f~/omega_y| < 1", smallness, 1.0));
    require(&hyp)?;

    let widths_out = Widths { r: w.r - 2.0 * p.r, rho: w.rho - 2.0 * p.rho, xi: w.xi - 2.0 * p.xi, s: s_plus, delta: delta_plus };
    let widths1 = Widths { r: w.r, rho: w.rho, xi: w.xi, s: s1, delta: delta1 };
    let g_plus = g.add(&f_bar)?.with_widths(widths_out);
    if f_tilde.is_zero() {
        let zero = f.like().with_widths(widths_out);
        let certificate = StepCertificate {
            constants: *consts,
            hypotheses: hyp,
            bounds: vec![],
            d,
            x_sup,
            widths_in: w,
            widths_out,
            f_norm,
            f_tilde_norm,
            f_plus_norm: 0.0,
            f_plus_tilde_norm: 0.0,
            phi_norm: 0.0,
            discarded: 0.0,
        };
        return Ok(StepResult { g_plus, f_plus: zero.clone(), phi: zero, certificate });
    }

    let phi = homological_solve(&f_tilde, freq)?;
    let phi_norm = phi.norm_with(&widths1);
    let inner = Widths { r: w.r - p.r, rho: w.rho - p.rho, xi: w.xi - p.xi, s: s1 - p.s, delta: delta1 - p.delta };
    let phi1 = phi.with_widths(widths1);
    let c_bar_check = check("c_bar |phi| / d < 1", consts.c_bar * phi_norm / d, 1.0);
    require(std::slice::from_ref(&c_bar_check))?;

    let total = h0.add(g)?.add(f)?;
    let q = lie_queue(&phi1, &total, 1, None)?;
    let f_plus = f_tilde.add(&q.series)?.with_widths(widths_out);
    let f_plus_norm = f_plus.norm();
    let f_plus_tilde_norm = f_plus.average_split().1.norm();
    let (phi_g, d_pg) = phi.bracket(g)?;
    // what the frozen frequencies leave of f̃ + {φ, h₀}
    let (phi_h0, d_ph) = phi.bracket(h0)?;
    let mismatch = f_tilde.add(&phi_h0)?.norm_with(&inner);
    let bound_rhs =
        consts.c_tilde * x_sup / d * f_tilde_norm * freq.inv_omega_y_sup * f_norm + phi_g.norm_with(&inner) + mismatch;
    let bounds = vec![
        c_bar_check,
        check("|f_+| <= c~ X/d |f~/omega_y| |f| + |{phi, g}| + |f~ + {phi, h0}|", f_plus_norm, bound_rhs * (1.0 + 1e-12)),
        check("|phi| <= X/d |f~/omega_y|", phi_norm, x_sup / d * f_tilde_norm * freq.inv_omega_y_sup * (1.0 + 1e-12)),
        check("|f~_+| <= |f~|/2", f_plus_tilde_norm, 0.5 * f_tilde_norm * (1.0 + 1e-12)),
    ];
    let certificate = StepCertificate {
        constants: *consts,
        hypotheses: hyp,
        bounds,
        d,
        x_sup,
        widths_in: w,
        widths_out,
        f_norm,
        f_tilde_norm,
        f_plus_norm,
        f_plus_tilde_norm,
        phi_norm,
        discarded: q.discarded + d_pg + d_ph,
    };
    Ok(StepResult { g_plus, f_plus, phi: phi1, certificate })
}

#[derive(Debug)]
pub struct NormalFormRun {
    /// Normal part accumulated beyond f̄₀.
    pub g_n: TaylorFourierSeries,
    pub f_n: TaylorFourierSeries,
    /// Hypotheses of the whole procedure.
    pub assumptions: Vec<Check>,
    pub steps: Vec<StepCertificate>,
    /// ‖f_j‖ at the widths of step j, starting with ‖f₀‖.
    pub f_norms: Vec<f64>,
    /// Set when a step failed; the fields above cover the completed steps.
    pub failure: Option<Error>,
}

impl NormalFormRun {
    /// Every completed step at least halved the remainder.
    pub fn halves_each_step(&self) -> bool {
        self.f_norms.windows(2).all(|w| w[1] <= 0.5 * w[0])
    }
}

/// N steps: the first with 2r′ = r/3, 3s′ = s/3 (and alike), the others
/// with r′ = r/(6N), s′ = s/(9N) (and alike), all in the stronger variant.
pub fn normal_form_n(
    h0: &TaylorFourierSeries,
    f: &TaylorFourierSeries,
    freq: &FrequencyData,
    n_steps: usize,
    consts: &Constants,
) -> Result<NormalFormRun> {
    if n_steps == 0 {
        return domain("N must be at least 1");
    }
    let w = f.chart.widths;
    let nn = n_steps as f64;
    let x_sup = f.chart.x_sup();
    let dd = if f.m > 0 { (w.rho * w.s).min(w.r * w.xi).min(w.delta * w.delta) } else { (w.rho * w.s).min(w.r * w.xi) };
    let mut assumptions = vec![check("4N X |omega_I/omega_y| < s", 4.0 * nn * x_sup * freq.omega_i_ratio_sup, w.s)];
    if f.m > 0 {
        assumptions.push(check("4N X |omega_J/omega_y| < 1", 4.0 * nn * x_sup * freq.omega_j_ratio_sup, 1.0));
    }
    assumptions.push(check(
        "c_nm N X/d |1/omega_y| |f_0| < 1",
        consts.c_nm * nn * x_sup / dd * freq.inv_omega_y_sup * f.norm(),
        1.0,
    ));
    require(&assumptions)?;

    let (f_bar0, _) = f.average_split();
    let mut g = f.like();
    let mut cur = f.clone();
    let mut steps = Vec::new();
    let mut f_norms = vec![f.norm()];
    let mut failure = None;
    for j in 0..n_steps {
        let primed = if j == 0 {
            Widths { r: w.r / 6.0, rho: w.rho / 6.0, xi: w.xi / 6.0, s: w.s / 9.0, delta: w.delta / 9.0 }
        } else {
            let k = 6.0 * nn;
            Widths { r: w.r / k, rho: w.rho / k, xi: w.xi / k, s: w.s / (1.5 * k), delta: w.delta / (1.5 * k) }
        };
        // the average of f₀ stays with h₀ and is not part of f
        let g_in = if j == 0 { g.clone() } else { g.with_widths(cur.chart.widths) };
        match iterative_step(h0, &g_in, &cur, freq, &primed, StepVariant::Stronger, consts) {
            Ok(step) => {
                g = step.g_plus;
                cur = step.f_plus;
                f_norms.push(step.certificate.f_plus_norm);
                steps.push(step.certificate);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let g_n = g.sub(&f_bar0.with_widths(g.chart.widths))?;
    Ok(NormalFormRun { g_n, f_n: cur, assumptions, steps, f_norms, failure })
}

/// Inputs of the stability-time theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetInputs {
    pub a: f64,
    pub m0: f64,
    pub m1: f64,
    pub m: f64,
    pub m0_prime: f64,
    pub e: f64,
    pub rho: f64,
    pub s: f64,
    pub delta: f64,
    pub big_delta: f64,
    pub eps0: f64,
    /// Overrides p★ = [2π/θ₀] + 1, θ₀ = atan(c/(2Δ)).
    pub p_star: Option<f64>,
    pub c_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBudget {
    pub inputs: BudgetInputs,
    pub c: f64,
    pub theta0: f64,
    pub p_star: f64,
    /// The three branches of the max defining ε, each with the 32p★ factor.
    pub eps_branches: [f64; 3],
    pub eps: f64,
    pub eps_prime: f64,
    /// N = [1/ε].
    pub n: u64,
    pub t1: f64,
    /// A-priori time without normal form.
    pub t0: f64,
    /// T ≤ as/(2EM₀′), the time for |Dω₀| ≤ a/2.
    pub t0_companion: f64,
    pub verdicts: Vec<Check>,
}

impl StabilityBudget {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(Check::holds)
    }

    /// log₂ of the certified horizon T₁·2^N.
    pub fn log2_horizon(&self) -> f64 {
        self.t1.log2() + self.n as f64
    }
}

pub fn stability_budget(inp: &BudgetInputs) -> Result<StabilityBudget> {
    let BudgetInputs { a, m0, m1, m, m0_prime, e, rho, s, delta, big_delta, eps0, p_star, c_n } = *inp;
    for (name, v) in [("a", a), ("M0", m0), ("rho", rho), ("s", s), ("delta", delta), ("Delta", big_delta), ("eps0", eps0)] {
        if !(v > 0.0) {
            return domain(format!("{name} must be positive, got {v}"));
        }
    }
    for (name, v) in [("M1", m1), ("M", m), ("M0'", m0_prime), ("E", e)] {
        if !(v >= 0.0) {
            return domain(format!("{name} must be non-negative, got {v}"));
        }
    }
    let c = 4.0 * rho * s / delta;
    let theta0 = (c / (2.0 * big_delta)).atan();
    let p_star = p_star.unwrap_or_else(|| (2.0 * std::f64::consts::PI / theta0).floor() + 1.0);
    let ratio = big_delta / delta;
    let eps_branches = [
        32.0 * p_star * 16.0 * rho * s * m0 / (a * delta * delta) * ratio,
        32.0 * p_star * 2.0 * e / (a * rho * s) * ratio,
        32.0 * p_star * 2.0 * rho * m1 / (p_star * a * delta * delta),
    ];
    let eps = eps_branches.iter().fold(0.0f64, |x, y| x.max(*y));
    let k = 4.0 * m / (a * delta * delta) + 2.0 * m0_prime / a * big_delta * big_delta / (delta * delta);
    let eps_prime = k * eps * rho + 8.0 * e / (a * delta * delta);
    let n = if eps > 0.0 { (1.0 / eps).floor().min(u64::MAX as f64) as u64 } else { u64::MAX };
    let t1 = s * eps0 / 2.0 * rho.min(1.0 / k) / (m0 / 2.0 * c * c + e);
    let t0_b = eps0 / (8.0 * e) / (m / (a * delta * delta) + m0_prime * big_delta * big_delta / (2.0 * a * delta * delta));
    let t0_companion = a * s / (2.0 * e * m0_prime);
    let t0 = s * (rho * eps0 / e).min(t0_b).min(a / (2.0 * e * m0_prime));
    let verdicts = vec![
        check("2 M0'/a eps0 rho <= 1", 2.0 * m0_prime / a * eps0 * rho, 1.0 + f64::EPSILON),
        check("4 rho s/(delta(Delta + delta)) <= 1", 4.0 * rho * s / (delta * (big_delta + delta)), 1.0 + f64::EPSILON),
        check("c_n rho s/(2 p* Delta delta) <= 1", c_n * rho * s / (2.0 * p_star * big_delta * delta), 1.0 + f64::EPSILON),
        check("eps <= eps0/2", eps, eps0 / 2.0 * (1.0 + f64::EPSILON)),
        check("eps' <= eps0/2", eps_prime, eps0 / 2.0 * (1.0 + f64::EPSILON)),
        check("16E/(a delta^2) <= eps0", 16.0 * e / (a * delta * delta), eps0 * (1.0 + f64::EPSILON)),
    ];
    Ok(StabilityBudget { inputs: *inp, c, theta0, p_star, eps_branches, eps, eps_prime, n, t1, t0, t0_companion, verdicts })
}

/// Inputs of the three-body application; `rho`, `s` and `alpha` default
/// to ρ₋, 1 and 1/3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem5Inputs {
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

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem5Budget {
    pub budget: StabilityBudget,
    /// max{ε/η², η³/ε, η, κ, μ, ε}.
    pub scaling_eps: f64,
    /// ε₀/(ε·scaling_eps), the T₁ law up to a constant.
    pub scaling_t1: f64,
    pub verdict: bool,
}

pub fn theorem5_budget(inp: &Theorem5Inputs, c_n: f64) -> Result<Theorem5Budget> {
    let Theorem5Inputs { eps, mu, eta, kappa, rho_minus, rho_plus, eps0, .. } = *inp;
    for (name, v) in [("eps", eps), ("eta", eta), ("rho_minus", rho_minus), ("rho_plus", rho_plus), ("eps0", eps0)] {
        if !(v > 0.0) {
            return domain(format!("{name} must be positive, got {v}"));
        }
    }
    let alpha = inp.alpha.unwrap_or(1.0 / 3.0);
    if !(alpha > 0.0 && alpha < 0.5) {
        return domain(format!("alpha must lie in (0, 1/2), got {alpha}"));
    }
    let beta = 1.0 - alpha;
    let rm2 = rho_minus * rho_minus;
    let e = [eps * eta, eps * kappa, eps * mu, eps * eps, eta.powi(3)].iter().fold(0.0f64, |a, b| a.max(*b)) / rm2;
    let s0 = (rho_minus.powf(1.5) / rho_plus).min(rm2 / rho_plus.powf(1.5));
    let scale = eta / (2.0 * eps.sqrt()) * s0;
    let inputs = BudgetInputs {
        a: eps / rho_plus.powi(3),
        m0: eps / rho_minus.powi(3),
        m1: eps * (rho_minus + eta * eta) / rho_minus.powi(4),
        m: eps / rho_minus.powi(3),
        m0_prime: eps * eps / rho_minus.powi(4),
        e,
        rho: inp.rho.unwrap_or(rho_minus),
        s: inp.s.unwrap_or(1.0),
        delta: alpha * scale,
        big_delta: beta * scale,
        eps0,
        p_star: None,
        c_n,
    };
    let budget = stability_budget(&inputs)?;
    let scaling_eps = [eps / (eta * eta), eta.powi(3) / eps, eta, kappa, mu, eps].iter().fold(0.0f64, |a, b| a.max(*b));
    let verdict = budget.all_hold();
    Ok(Theorem5Budget { scaling_t1: eps0 / (eps * scaling_eps), scaling_eps, budget, verdict })
}

/// The desk case: n = 1, m = 0, h₀ = ωI + ω₀y²/2, f = ε cos φ · x, on the
/// chart I₀ = 1, y₀, x ∈ [−1/2, 1/2] with widths r = ρ = s = 1, ξ = 1/2.
pub struct DeskCase {
    pub h0: TaylorFourierSeries,
    pub f: TaylorFourierSeries,
    pub freq: FrequencyData,
}

pub fn desk_case(omega: f64, omega0: f64, y0: f64, eps: f64) -> Result<DeskCase> {
    use crate::core_model::ChartBox;
    use crate::series::Truncation;
    let w = Widths { r: 1.0, rho: 1.0, xi: 0.5, s: 1.0, delta: 1.0 };
    let chart = ChartBox::new(vec![1.0], y0, 0.5, w)?;
    let trunc = Truncation { k_max: 8, poly_max: 8, x_max: 40, pq_max: 0 };
    let base = TaylorFourierSeries::zero(1, 0, chart, trunc)?;
    let one = Monomial::one(1, 0);
    let with = |f: &dyn Fn(&mut Monomial)| {
        let mut m = one.clone();
        f(&mut m);
        m
    };
    let i0 = 1.0;
    let h0 = base
        .clone()
        .with_term(one.clone(), (omega * i0 + omega0 * y0 * y0 / 2.0).into())
        .with_term(with(&|m| m.a[0] = 1), omega.into())
        .with_term(with(&|m| m.a[1] = 1), (omega0 * y0).into())
        .with_term(with(&|m| m.a[1] = 2), (omega0 / 2.0).into());
    let f = base
        .with_term(with(&|m| { m.k[0] = 1; m.b = 1 }), (eps / 2.0).into())
        .with_term(with(&|m| { m.k[0] = -1; m.b = 1 }), (eps / 2.0).into());
    // ω_y = ω₀y ranges over [ω₀(y₀ − r), ω₀(y₀ + r)]
    let wy_min = omega0 * (y0 - w.r);
    if !(wy_min > 0.0) {
        return domain("the desk chart must keep ω_y away from 0");
    }
    let freq = FrequencyData::with_sups(omega0 * y0, vec![omega], vec![], 1.0 / wy_min, omega.abs() / wy_min, 0.0)?;
    Ok(DeskCase { h0, f, freq })
}
