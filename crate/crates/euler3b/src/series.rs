//! Truncated Taylor–Fourier series in (I, φ, y, x, p, q).
//!
//! A term is c·e^{ik·φ}·pʰ·qʲ·(I − I₀)^a·(y − y₀)^{a_y}·xᵇ·e^{μx} with complex
//! c and μ. Terms live in a `BTreeMap`, so every traversal, and therefore
//! every output, is in a fixed order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::core_model::{ChartBox, Widths};
use crate::error::{Error, Result};

/// Complex exponent with a total order, −0.0 folded into 0.0.
#[derive(Debug, Clone, Copy)]
pub struct Exponent(Complex64);

impl Exponent {
    pub fn new(z: Complex64) -> Self {
        Self(Complex64::new(z.re + 0.0, z.im + 0.0))
    }

    pub fn zero() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Exponent {}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.re.total_cmp(&other.0.re).then(self.0.im.total_cmp(&other.0.im))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Monomial {
    pub k: Vec<i32>,
    pub h: Vec<u32>,
    pub j: Vec<u32>,
    /// Powers of I − I₀ (n entries) followed by the power of y − y₀.
    pub a: Vec<u32>,
    pub b: u32,
    pub mu: Exponent,
}

impl Monomial {
    pub fn one(n: usize, m: usize) -> Self {
        Self { k: vec![0; n], h: vec![0; m], j: vec![0; m], a: vec![0; n + 1], b: 0, mu: Exponent::zero() }
    }

    pub fn k_norm(&self) -> i32 {
        self.k.iter().map(|v| v.abs()).sum()
    }

    pub fn pq_degree(&self) -> u32 {
        self.h.iter().sum::<u32>() + self.j.iter().sum::<u32>()
    }

    pub fn poly_degree(&self) -> u32 {
        self.a.iter().sum()
    }

    /// (k, h − j) = (0, 0).
    pub fn is_average(&self) -> bool {
        self.k.iter().all(|&v| v == 0) && self.h == self.j
    }

    fn mul(&self, other: &Self) -> Self {
        let add_u = |x: &[u32], y: &[u32]| x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>();
        Self {
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            h: add_u(&self.h, &other.h),
            j: add_u(&self.j, &other.j),
            a: add_u(&self.a, &other.a),
            b: self.b + other.b,
            mu: Exponent::new(self.mu.0 + other.mu.0),
        }
    }
}

/// Orders kept by the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub k_max: i32,
    /// Total degree in (I − I₀, y − y₀).
    pub poly_max: u32,
    pub x_max: u32,
    pub pq_max: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { k_max: 8, poly_max: 6, x_max: 12, pq_max: 6 }
    }
}

impl Truncation {
    pub fn keeps(&self, mono: &Monomial) -> bool {
        mono.k_norm() <= self.k_max
            && mono.poly_degree() <= self.poly_max
            && mono.b <= self.x_max
            && mono.pq_degree() <= self.pq_max
    }
}

/// Coefficients below this size are dropped from products.
const PRUNE: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorFourierSeries {
    pub n: usize,
    pub m: usize,
    pub chart: ChartBox,
    pub trunc: Truncation,
    pub terms: BTreeMap<Monomial, Complex64>,
}

/// Sup of |(I − I₀)^a (y − y₀)^{a_y} xᵇ e^{μx}| over the complex chart
/// domain, bounded factor by factor.
fn monomial_sup(mono: &Monomial, chart: &ChartBox, w: &Widths) -> f64 {
    let n = mono.k.len();
    let mut v = 1.0;
    for i in 0..n {
        v *= w.rho.powi(mono.a[i] as i32);
    }
    v *= w.r.powi(mono.a[n] as i32);
    let xs = chart.x_range + w.xi;
    v *= xs.powi(mono.b as i32);
    let mu = mono.mu.0;
    v *= (mu.re.abs() * chart.x_range + mu.norm() * w.xi).exp();
    v
}

impl TaylorFourierSeries {
    pub fn zero(n: usize, m: usize, chart: ChartBox, trunc: Truncation) -> Result<Self> {
        if chart.i_center.len() != n {
            return Err(Error::Incompatible(format!(
                "chart has {} action centers, series needs {n}",
                chart.i_center.len()
            )));
        }
        Ok(Self { n, m, chart, trunc, terms: BTreeMap::new() })
    }

    /// Empty series on the same ring.
    pub fn like(&self) -> Self {
        Self { n: self.n, m: self.m, chart: self.chart.clone(), trunc: self.trunc, terms: BTreeMap::new() }
    }

    pub fn one(&self) -> Monomial {
        Monomial::one(self.n, self.m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds c·mono; returns false (and drops it) if beyond the truncation.
    pub fn add_term(&mut self, mono: Monomial, c: Complex64) -> bool {
        if !self.trunc.keeps(&mono) {
            return false;
        }
        self.add_raw(mono, c);
        true
    }

    fn add_raw(&mut self, mono: Monomial, c: Complex64) {
        use std::collections::btree_map::Entry;
        let zero = Complex64::new(0.0, 0.0);
        if c == zero {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == zero {
                    e.remove();
                }
            }
        }
    }

    pub fn with_term(mut self, mono: Monomial, c: Complex64) -> Self {
        self.add_term(mono, c);
        self
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.m != other.m || !self.chart.same_center(&other.chart) {
            return Err(Error::Incompatible("series live on different charts".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (mono, c) in &other.terms {
            out.add_raw(mono.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.like();
        for (mono, c) in &self.terms {
            out.add_raw(mono.clone(), c * s);
        }
        out
    }

    /// Product on the ring, with the majorant norm of the discarded terms.
    pub fn mul(&self, other: &Self) -> Result<(Self, f64)> {
        self.compatible(other)?;
        let mut out = self.like();
        let mut discarded = 0.0;
        let w = self.chart.widths;
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mono = m1.mul(m2);
                let c = c1 * c2;
                if !self.trunc.keeps(&mono) || c.norm() < PRUNE {
                    discarded += c.norm() * self.term_weight(&mono, &w);
                    continue;
                }
                out.add_raw(mono, c);
            }
        }
        Ok((out, discarded))
    }

    fn term_weight(&self, mono: &Monomial, w: &Widths) -> f64 {
        monomial_sup(mono, &self.chart, w) * (w.s * mono.k_norm() as f64).exp() * w.delta.powi(mono.pq_degree() as i32)
    }

    /// Σ |c|·sup|coefficient monomial|·e^{s|k|}·δ^{|h|+|j|}, an upper bound
    /// of Σ_{khj} ‖f_khj‖ e^{s|k|} δ^{h+j}.
    pub fn norm(&self) -> f64 {
        self.norm_with(&self.chart.widths)
    }

    pub fn norm_with(&self, w: &Widths) -> f64 {
        self.terms.iter().map(|(mono, c)| c.norm() * self.term_weight(mono, w)).sum()
    }

    pub fn with_widths(&self, w: Widths) -> Self {
        let mut out = self.clone();
        out.chart.widths = w;
        out
    }

    /// (f̄, f̃): terms with (k, h − j) = (0, 0) and the rest.
    pub fn average_split(&self) -> (Self, Self) {
        let (mut avg, mut off) = (self.like(), self.like());
        for (mono, c) in &self.terms {
            if mono.is_average() {
                avg.terms.insert(mono.clone(), *c);
            } else {
                off.terms.insert(mono.clone(), *c);
            }
        }
        (avg, off)
    }

    fn map_terms<F: Fn(&Monomial, Complex64) -> Vec<(Monomial, Complex64)>>(&self, f: F) -> Self {
        let mut out = self.like();
        for (mono, c) in &self.terms {
            for (m2, c2) in f(mono, *c) {
                out.add_raw(m2, c2);
            }
        }
        out
    }

    pub fn d_phi(&self, i: usize) -> Self {
        self.map_terms(|mono, c| vec![(mono.clone(), c * Complex64::new(0.0, mono.k[i] as f64))])
    }

    /// ∂ with respect to I_i (i < n) or y (i = n).
    pub fn d_action(&self, i: usize) -> Self {
        self.map_terms(|mono, c| {
            if mono.a[i] == 0 {
                return vec![];
            }
            let mut m2 = mono.clone();
            m2.a[i] -= 1;
            vec![(m2, c * mono.a[i] as f64)]
        })
    }

    pub fn d_y(&self) -> Self {
        self.d_action(self.n)
    }

    pub fn d_x(&self) -> Self {
        self.map_terms(|mono, c| {
            let mut out = vec![(mono.clone(), c * mono.mu.0)];
            if mono.b > 0 {
                let mut m2 = mono.clone();
                m2.b -= 1;
                out.push((m2, c * mono.b as f64));
            }
            out
        })
    }

    pub fn d_p(&self, i: usize) -> Self {
        self.map_terms(|mono, c| {
            if mono.h[i] == 0 {
                return vec![];
            }
            let mut m2 = mono.clone();
            m2.h[i] -= 1;
            vec![(m2, c * mono.h[i] as f64)]
        })
    }

    pub fn d_q(&self, i: usize) -> Self {
        self.map_terms(|mono, c| {
            if mono.j[i] == 0 {
                return vec![];
            }
            let mut m2 = mono.clone();
            m2.j[i] -= 1;
            vec![(m2, c * mono.j[i] as f64)]
        })
    }

    /// {f, g} = Σ ∂_P f ∂_Q g − ∂_P g ∂_Q f over the pairs (P, Q) = (I, φ),
    /// (y, x), (q, p); so {I, φ} = {y, x} = {q, p} = 1. Returns the bracket
    /// and the majorant norm discarded by truncation.
    pub fn bracket(&self, g: &Self) -> Result<(Self, f64)> {
        self.compatible(g)?;
        let mut out = self.like();
        let mut discarded = 0.0;
        let mut acc = |a: Self, b: Self, sign: f64| -> Result<()> {
            if a.is_zero() || b.is_zero() {
                return Ok(());
            }
            let (p, d) = a.mul(&b)?;
            discarded += d;
            for (mono, c) in p.terms {
                out.add_raw(mono, c * sign);
            }
            Ok(())
        };
        for i in 0..self.n {
            acc(self.d_action(i), g.d_phi(i), 1.0)?;
            acc(g.d_action(i), self.d_phi(i), -1.0)?;
        }
        acc(self.d_y(), g.d_x(), 1.0)?;
        acc(g.d_y(), self.d_x(), -1.0)?;
        for i in 0..self.m {
            acc(self.d_q(i), g.d_p(i), 1.0)?;
            acc(g.d_q(i), self.d_p(i), -1.0)?;
        }
        Ok((out, discarded))
    }

    /// Value at a (complex) point.
    pub fn eval(
        &self,
        i: &[Complex64],
        phi: &[Complex64],
        y: Complex64,
        x: Complex64,
        p: &[Complex64],
        q: &[Complex64],
    ) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        let ci = Complex64::new(0.0, 1.0);
        for (mono, c) in &self.terms {
            let mut v = *c;
            let mut arg = Complex64::new(0.0, 0.0);
            for t in 0..self.n {
                arg += mono.k[t] as f64 * phi[t];
                v *= (i[t] - self.chart.i_center[t]).powu(mono.a[t]);
            }
            v *= (ci * arg).exp();
            v *= (y - self.chart.y_center).powu(mono.a[self.n]);
            v *= x.powu(mono.b) * (mono.mu.0 * x).exp();
            for t in 0..self.m {
                v *= p[t].powu(mono.h[t]) * q[t].powu(mono.j[t]);
            }
            s += v;
        }
        s
    }

    /// One line per term: `k | h | j | powers | exponent | coefficient`,
    /// with each field a space-separated list and complex numbers as
    /// `re im`. Floats use the shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let list = |v: &[String]| v.join(" ");
        let mut out = format!("# n={} m={}\n", self.n, self.m);
        for (mono, c) in &self.terms {
            let k: Vec<String> = mono.k.iter().map(|v| v.to_string()).collect();
            let h: Vec<String> = mono.h.iter().map(|v| v.to_string()).collect();
            let j: Vec<String> = mono.j.iter().map(|v| v.to_string()).collect();
            let mut pw: Vec<String> = mono.a.iter().map(|v| v.to_string()).collect();
            pw.push(mono.b.to_string());
            let _ = writeln!(
                out,
                "{} | {} | {} | {} | {} {} | {} {}",
                list(&k),
                list(&h),
                list(&j),
                list(&pw),
                mono.mu.0.re,
                mono.mu.0.im,
                c.re,
                c.im
            );
        }
        out
    }

    pub fn from_text(text: &str, chart: ChartBox, trunc: Truncation) -> Result<Self> {
        let bad = |line: &str| Error::Config(format!("malformed series line: {line}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Config("empty series text".into()))?;
        let mut nm = header.trim_start_matches('#').split_whitespace().map(|t| {
            t.split('=').nth(1).and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| bad(header))
        });
        let n = nm.next().ok_or_else(|| bad(header))??;
        let m = nm.next().ok_or_else(|| bad(header))??;
        let mut out = Self::zero(n, m, chart, trunc)?;
        for line in lines {
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(bad(line));
            }
            let ints = |s: &str| -> Result<Vec<i64>> {
                s.split_whitespace().map(|t| t.parse::<i64>().map_err(|_| bad(line))).collect()
            };
            let floats = |s: &str| -> Result<Vec<f64>> {
                s.split_whitespace().map(|t| t.parse::<f64>().map_err(|_| bad(line))).collect()
            };
            let (k, h, j, pw) = (ints(fields[0])?, ints(fields[1])?, ints(fields[2])?, ints(fields[3])?);
            let (mu, c) = (floats(fields[4])?, floats(fields[5])?);
            if k.len() != n || h.len() != m || j.len() != m || pw.len() != n + 2 || mu.len() != 2 || c.len() != 2 {
                return Err(bad(line));
            }
            if h.iter().chain(&j).chain(&pw).any(|&v| v < 0) {
                return Err(bad(line));
            }
            let mono = Monomial {
                k: k.iter().map(|&v| v as i32).collect(),
                h: h.iter().map(|&v| v as u32).collect(),
                j: j.iter().map(|&v| v as u32).collect(),
                a: pw[..n + 1].iter().map(|&v| v as u32).collect(),
                b: pw[n + 1] as u32,
                mu: Exponent::new(Complex64::new(mu[0], mu[1])),
            };
            out.terms.insert(mono, Complex64::new(c[0], c[1]));
        }
        Ok(out)
    }
}

/// Chart with I₀ = 1, y₀ = 2, x ∈ [−1/2, 1/2] and widths
/// r = ρ = s = δ = 1/2, ξ = 1/4, used by the randomized checks.
pub fn sample_chart(n: usize) -> ChartBox {
    let w = Widths { r: 0.5, rho: 0.5, xi: 0.25, s: 0.5, delta: 0.5 };
    ChartBox::new(vec![1.0; n], 2.0, 0.5, w).expect("valid chart")
}

/// Random series on [`sample_chart`] with |k| ≤ 2, degrees ≤ 1 in the
/// actions, p, q and y, degree ≤ 2 in x and real exponents in {0, ±1/2}.
pub fn random_series<R: rand::Rng>(rng: &mut R, n: usize, m: usize, terms: usize, scale: f64) -> TaylorFourierSeries {
    let mut f = TaylorFourierSeries::zero(n, m, sample_chart(n), Truncation::default()).expect("valid chart");
    for _ in 0..terms {
        let mono = Monomial {
            k: (0..n).map(|_| rng.gen_range(-2..=2)).collect(),
            h: (0..m).map(|_| rng.gen_range(0..=1)).collect(),
            j: (0..m).map(|_| rng.gen_range(0..=1)).collect(),
            a: (0..=n).map(|_| rng.gen_range(0..=1)).collect(),
            b: rng.gen_range(0..=2),
            mu: Exponent::new(Complex64::new(rng.gen_range(-1..=1) as f64 * 0.5, 0.0)),
        };
        f.add_term(mono, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale);
    }
    f
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) use super::random_series;

    pub(crate) fn chart(n: usize) -> ChartBox {
        sample_chart(n)
    }

    fn mono_k(n: usize, m: usize, k: &[i32]) -> Monomial {
        let mut mono = Monomial::one(n, m);
        mono.k = k.to_vec();
        mono
    }

    #[test]
    fn single_term_norm() {
        let f = TaylorFourierSeries::zero(1, 0, chart(1), Truncation::default())
            .unwrap()
            .with_term(mono_k(1, 0, &[3]), Complex64::new(0.0, 2.0));
        assert!((f.norm() - 2.0 * (3.0 * 0.5f64).exp()).abs() < 1e-14);
        assert_eq!(f.like().norm(), 0.0);
    }

    #[test]
    fn split_cases() {
        let base = TaylorFourierSeries::zero(1, 1, chart(1), Truncation::default()).unwrap();
        let mut mono = Monomial::one(1, 1);
        mono.a = vec![1, 2];
        mono.h = vec![1];
        mono.j = vec![1];
        let f = base.clone().with_term(mono, Complex64::new(1.0, 0.0));
        let (a, o) = f.average_split();
        assert_eq!(a, f);
        assert!(o.is_zero());
        let f = base.with_term(mono_k(1, 1, &[1]), Complex64::new(1.0, 0.0));
        assert!(f.average_split().0.is_zero());
    }

    #[test]
    fn canonical_pairs() {
        let base = TaylorFourierSeries::zero(1, 1, chart(1), Truncation::default()).unwrap();
        let ci = Complex64::new(0.0, 1.0);
        let mut i_mono = Monomial::one(1, 1);
        i_mono.a = vec![1, 0];
        let action = base.clone().with_term(i_mono, Complex64::new(1.0, 0.0));
        // e^{iφ}: {I, e^{iφ}} = i e^{iφ}
        let wave = base.clone().with_term(mono_k(1, 1, &[1]), Complex64::new(1.0, 0.0));
        let (b, _) = action.bracket(&wave).unwrap();
        assert_eq!(b, wave.scale(ci));
        let mut y_mono = Monomial::one(1, 1);
        y_mono.a = vec![0, 1];
        let mut x_mono = Monomial::one(1, 1);
        x_mono.b = 1;
        let (yx, _) = base.clone().with_term(y_mono, 1.0.into()).bracket(&base.clone().with_term(x_mono, 1.0.into())).unwrap();
        assert_eq!(yx.terms.get(&Monomial::one(1, 1)), Some(&Complex64::new(1.0, 0.0)));
        let mut q_mono = Monomial::one(1, 1);
        q_mono.j = vec![1];
        let mut p_mono = Monomial::one(1, 1);
        p_mono.h = vec![1];
        let (qp, _) = base.clone().with_term(q_mono, 1.0.into()).bracket(&base.with_term(p_mono, 1.0.into())).unwrap();
        assert_eq!(qp.terms.get(&Monomial::one(1, 1)), Some(&Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn bracket_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let f = random_series(&mut rng, 1, 1, 5, 1.0);
            let g = random_series(&mut rng, 1, 1, 5, 1.0);
            let h = random_series(&mut rng, 1, 1, 5, 1.0);
            assert!(f.bracket(&f).unwrap().0.norm() < 1e-12);
            let (fg, _) = f.bracket(&g).unwrap();
            let (gf, _) = g.bracket(&f).unwrap();
            assert!(fg.add(&gf).unwrap().norm() < 1e-12 * fg.norm().max(1.0));
            let (lin, _) = f.bracket(&g.add(&h.scale(2.0.into())).unwrap()).unwrap();
            let (fh, _) = f.bracket(&h).unwrap();
            let want = fg.add(&fh.scale(2.0.into())).unwrap();
            assert!(lin.sub(&want).unwrap().norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn jacobi_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let big = Truncation { k_max: 30, poly_max: 30, x_max: 30, pq_max: 30 };
        for _ in 0..5 {
            let mut fs: Vec<TaylorFourierSeries> = (0..3).map(|_| random_series(&mut rng, 1, 1, 3, 1.0)).collect();
            for f in &mut fs {
                f.trunc = big;
            }
            let br = |a: &TaylorFourierSeries, b: &TaylorFourierSeries| a.bracket(b).unwrap();
            let mut total = fs[0].like();
            let mut discarded = 0.0;
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let (bc, d1) = br(&fs[b], &fs[c]);
                let (abc, d2) = br(&fs[a], &bc);
                discarded += d1 + d2;
                total = total.add(&abc).unwrap();
            }
            assert!(total.norm() <= 1e-10 + discarded, "{}", total.norm());
        }
    }

    #[test]
    fn derivative_matches_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_series(&mut rng, 1, 1, 8, 1.0);
        let pt = |dx: f64| {
            f.eval(
                &[Complex64::new(1.1, 0.0)],
                &[Complex64::new(0.3, 0.0)],
                Complex64::new(2.2, 0.0),
                Complex64::new(0.4 + dx, 0.0),
                &[Complex64::new(0.2, 0.0)],
                &[Complex64::new(0.1, 0.0)],
            )
        };
        let h = 1e-6;
        let fd = (pt(h) - pt(-h)) / (2.0 * h);
        let an = f.d_x().eval(
            &[Complex64::new(1.1, 0.0)],
            &[Complex64::new(0.3, 0.0)],
            Complex64::new(2.2, 0.0),
            Complex64::new(0.4, 0.0),
            &[Complex64::new(0.2, 0.0)],
            &[Complex64::new(0.1, 0.0)],
        );
        assert!((fd - an).norm() < 1e-7 * an.norm().max(1.0));
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = random_series(&mut rng, 2, 1, 12, 0.3);
        let text = f.to_text();
        let g = TaylorFourierSeries::from_text(&text, f.chart.clone(), f.trunc).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.to_text(), text);
        assert!(TaylorFourierSeries::from_text("# n=1 m=0\n1 | | | 0 0 |", chart(1), f.trunc).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn norm_is_submultiplicative(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_series(&mut rng, 1, 1, 4, 0.2);
            let g = random_series(&mut rng, 1, 1, 4, 0.2);
            let (fg, _) = f.mul(&g).unwrap();
            prop_assert!(fg.norm() <= f.norm() * g.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn split_is_idempotent(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_series(&mut rng, 2, 1, 10, 1.0);
            let (a, o) = f.average_split();
            prop_assert_eq!(a.add(&o).unwrap(), f);
            prop_assert_eq!(a.average_split().0, a.clone());
            prop_assert!(o.average_split().0.is_zero());
        }
    }
}
