//! Integration engine: oscillatory half-line integrals against smooth
//! cutoffs, principal values, circle averages and the singular double
//! integrals behind `F^±`.

pub mod gauss;
mod double;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::{self, LinearFit};
use crate::jet::{Jet, MAX_ORDER};
use crate::resolvent::CutoffSpec;
use gauss::{adaptive, adaptive_complex};

pub use double::{singular_double_integral, KernelTag};
pub use gauss::Estimate;

/// Tolerances and controls shared by the integrators.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub pv_epsilons: Vec<f64>,
    pub oscillation_threshold: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_panels: 2000,
            pv_epsilons: vec![1e-2, 1e-3, 1e-4],
            oscillation_threshold: 1.0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if self.pv_epsilons.is_empty()
            || self.pv_epsilons.windows(2).any(|w| w[1] >= w[0])
            || self.pv_epsilons.iter().any(|&e| e <= 0.0)
        {
            return Err(Error::Invalid("pv_epsilons must be positive and strictly decreasing".into()));
        }
        if self.max_panels == 0 {
            return Err(Error::Invalid("max_panels must be positive".into()));
        }
        Ok(())
    }

    fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Derivative oracle: `(λ, k) ↦ [ψ(λ), ψ'(λ), …, ψ^{(k)}(λ)]`.
pub type SymbolOracle = Arc<dyn Fn(f64, usize) -> Vec<Complex64> + Send + Sync>;

/// A symbol `ψ` of class `b` together with the cutoff it is integrated against.
#[derive(Clone)]
pub struct OscillatoryIntegrand {
    psi: SymbolOracle,
    pub b: f64,
    pub k_max: usize,
    pub cutoff: CutoffSpec,
}

impl std::fmt::Debug for OscillatoryIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OscillatoryIntegrand")
            .field("b", &self.b)
            .field("k_max", &self.k_max)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

impl OscillatoryIntegrand {
    pub fn new(psi: SymbolOracle, b: f64, k_max: usize, cutoff: CutoffSpec) -> Result<Self> {
        if !(b > -1.0) {
            return Err(Error::Precondition(format!("symbol class needs b > −1, got {b}")));
        }
        if !(k_max as f64 > b + 1.0) || k_max > MAX_ORDER {
            return Err(Error::Precondition(format!(
                "derivative order k = {k_max} must satisfy b + 1 < k ≤ {MAX_ORDER}"
            )));
        }
        Ok(OscillatoryIntegrand { psi, b, k_max, cutoff })
    }

    /// `ψ(λ) = c·λ^b` with exact derivatives.
    pub fn power(b: f64, c: Complex64, k_max: usize, cutoff: CutoffSpec) -> Result<Self> {
        let psi: SymbolOracle = Arc::new(move |l: f64, k: usize| {
            let mut out = Vec::with_capacity(k + 1);
            let mut fall = 1.0;
            for j in 0..=k {
                out.push(c * fall * l.powf(b - j as f64));
                fall *= b - j as f64;
            }
            out
        });
        OscillatoryIntegrand::new(psi, b, k_max, cutoff)
    }

    /// Symbol given only by values; derivatives by 8th-order centered
    /// differences with step `λ/32`.
    pub fn from_values<F>(f: F, b: f64, k_max: usize, cutoff: CutoffSpec) -> Result<Self>
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        let psi: SymbolOracle = Arc::new(move |l: f64, k: usize| {
            let h = l / 32.0;
            (0..=k).map(|j| finite_difference(&f, l, h, j)).collect()
        });
        OscillatoryIntegrand::new(psi, b, k_max, cutoff)
    }

    pub fn derivatives(&self, lambda: f64, k: usize) -> Vec<Complex64> {
        (self.psi)(lambda, k)
    }

    /// `(ψχ)^{(j)}`-style products: derivatives of `ψ·w` where `w` is a real jet.
    fn product_derivative(&self, lambda: f64, w: &Jet, k: usize) -> Complex64 {
        let d = self.derivatives(lambda, k);
        let mut binom = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            sum += d[j] * binom * w.derivative(k - j);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        sum
    }
}

/// Centered finite difference of order `k` (k ≤ 7) with an 8th-order stencil
/// for `k = 1`, and repeated application beyond.
fn finite_difference<F: Fn(f64) -> Complex64>(f: &F, x: f64, h: f64, k: usize) -> Complex64 {
    if k == 0 {
        return f(x);
    }
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut s = Complex64::new(0.0, 0.0);
    for (m, c) in C.iter().enumerate() {
        let t = (m + 1) as f64 * h;
        s += (finite_difference(f, x + t, h, k - 1) - finite_difference(f, x - t, h, k - 1)) * *c;
    }
    s / h
}

fn tolerance_error(v: Complex64, err: f64) -> Error {
    Error::Quadrature { value: v.norm(), error: err }
}

/// Panels on `[a, b]`, dyadic in `λ` when `a > 0`, each covering at most
/// one period of `e^{iλρ}`.
fn oscillation_panels(a: f64, b: f64, rho: f64) -> Vec<(f64, f64)> {
    let period = if rho != 0.0 { 2.0 * PI / rho.abs() } else { f64::INFINITY };
    let mut out = Vec::new();
    let mut lo = a;
    while lo < b {
        let hi = if a > 0.0 { (2.0 * lo).min(b) } else { b };
        let pieces = ((hi - lo) / period).ceil().max(1.0) as usize;
        let step = (hi - lo) / pieces as f64;
        for p in 0..pieces {
            let s = lo + p as f64 * step;
            out.push((s, if p + 1 == pieces { hi } else { s + step }));
        }
        lo = hi;
    }
    out
}

/// Integral over `[0, top]` of an integrand with an integrable algebraic
/// singularity at 0: dyadic panels refined toward the origin.
fn graded_from_zero<F: Fn(f64) -> Complex64>(f: &F, top: f64, tol: f64) -> (Complex64, f64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut hi = top;
    let mut quiet = 0;
    for _ in 0..1200 {
        let lo = 0.5 * hi;
        let est = adaptive_complex(f, lo, hi, &[], 1e-2 * tol, 1e-13, 64);
        let v = est.value;
        value += v;
        error += est.error;
        if v.norm() < 1e-3 * tol {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        hi = lo;
        if hi < f64::MIN_POSITIVE {
            break;
        }
    }
    (value, error)
}

/// `∫₀^∞ e^{iλρ} ψ(λ) χ(λ) dλ`.
///
/// Below `λ = 1/(2|ρ|)` the integrand is integrated directly on dyadic panels;
/// above it the integral is taken by parts `k` times using the derivative
/// oracles, with the two regimes glued by a smooth partition of unity.
pub fn oscillatory_halfline(
    ig: &OscillatoryIntegrand,
    rho: f64,
    cfg: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    cfg.validate()?;
    let chi = ig.cutoff;
    let top = chi.hi;
    let tol = cfg.abs_tol;
    let split = if rho == 0.0 { f64::INFINITY } else { 1.0 / (2.0 * rho.abs()) };
    if 2.0 * split >= top {
        return oscillatory_direct(ig, rho, cfg);
    }
    let theta = CutoffSpec::new(split, 2.0 * split, MAX_ORDER)?;
    let phase = |l: f64| Complex64::cis(rho * l);

    let low = |l: f64| {
        let psi = ig.derivatives(l, 0)[0];
        phase(l) * psi * chi.value(l) * theta.value(l)
    };
    let (v0, e0) = graded_from_zero(&low, 2.0 * split, tol);

    let k = ig.k_max;
    let tail = |l: f64| {
        let x = Jet::variable(l, k);
        let w = chi.jet(x) * (-theta.jet(x) + 1.0);
        phase(l) * ig.product_derivative(l, &w, k)
    };
    let panels = oscillation_panels(split, top, rho);
    if panels.len() > cfg.max_panels {
        return Err(tolerance_error(v0, f64::INFINITY));
    }
    let factor = Complex64::new(0.0, 1.0 / rho).powu(k as u32);
    let breaks: Vec<f64> = panels.iter().map(|p| p.0).chain([2.0 * split, chi.lo]).collect();
    let est = adaptive_complex(
        tail,
        split,
        top,
        &breaks,
        0.1 * tol / factor.norm(),
        0.1 * cfg.rel_tol,
        cfg.max_panels + panels.len(),
    );
    let (v1, e1) = (est.value, est.error);
    let value = v0 + factor * v1;
    let error = e0 + factor.norm() * e1 + 1e-15 * (v0.norm() + (factor * v1).norm());
    if !cfg.accepts(value.norm(), error) {
        return Err(tolerance_error(value, error));
    }
    Ok(Estimate { value, error, evaluations: 0 })
}

/// Same integral computed without integration by parts; independent
/// cross-check of [`oscillatory_halfline`].
pub fn oscillatory_direct(
    ig: &OscillatoryIntegrand,
    rho: f64,
    cfg: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    let chi = ig.cutoff;
    let f = |l: f64| Complex64::cis(rho * l) * ig.derivatives(l, 0)[0] * chi.value(l);
    let first = if rho == 0.0 { chi.hi } else { (1.0 / rho.abs()).min(chi.hi) };
    let (mut value, mut error) = graded_from_zero(&f, first, cfg.abs_tol);
    if first < chi.hi {
        let panels = oscillation_panels(first, chi.hi, rho);
        if panels.len() > cfg.max_panels {
            return Err(tolerance_error(value, f64::INFINITY));
        }
        let breaks: Vec<f64> = panels.iter().map(|p| p.0).chain([chi.lo]).collect();
        let est = adaptive_complex(
            &f,
            first,
            chi.hi,
            &breaks,
            0.1 * cfg.abs_tol,
            0.1 * cfg.rel_tol,
            cfg.max_panels + panels.len(),
        );
        value += est.value;
        error += est.error;
    }
    error += 1e-15 * value.norm();
    if !cfg.accepts(value.norm(), error) {
        return Err(tolerance_error(value, error));
    }
    Ok(Estimate { value, error, evaluations: 0 })
}

/// Fitted power law of `|I(ρ)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub r2: f64,
    pub points: usize,
    pub failures: usize,
}

/// Log-log slope of `|oscillatory_halfline(ig, ρ)|` over `rho_grid`.
pub fn decay_rate_probe(ig: &OscillatoryIntegrand, rho_grid: &[f64], cfg: &QuadConfig) -> Result<DecayFit> {
    check_decades(rho_grid)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in rho_grid {
        if let Ok(e) = oscillatory_halfline(ig, r, cfg) {
            xs.push(r.abs());
            ys.push(e.value.norm());
        }
    }
    decay_fit(&xs, &ys, rho_grid.len())
}

/// Slope fit for already computed magnitudes (also used for synthetic input).
pub fn decay_fit(rhos: &[f64], magnitudes: &[f64], attempted: usize) -> Result<DecayFit> {
    let ok = rhos.len();
    if (ok as f64) < 0.8 * attempted as f64 || ok < 2 {
        return Err(Error::NonConvergence(format!(
            "only {ok} of {attempted} decay-probe points converged"
        )));
    }
    let LinearFit { slope, r2, .. } = fit::loglog_fit(rhos, magnitudes);
    Ok(DecayFit { slope, r2, points: ok, failures: attempted - ok })
}

fn check_decades(grid: &[f64]) -> Result<()> {
    let lo = grid.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min);
    let hi = grid.iter().map(|r| r.abs()).fold(0.0, f64::max);
    if lo <= 1.0 || hi / lo < 99.999 {
        return Err(Error::Precondition(
            "decay probe needs |ρ| > 1 spanning at least two decades".into(),
        ));
    }
    Ok(())
}

/// `PV ∫_a^b f(y) dy` for `f` with a simple pole at `c ∈ (a, b)`.
///
/// The symmetric pair `f(c+t) + f(c−t)` is integrated over `[ε, δ]` for each
/// excision radius in `cfg.pv_epsilons` and the sequence is extrapolated to
/// `ε = 0` (it is odd in `ε`).
pub fn principal_value<F: Fn(f64) -> f64>(
    f: F,
    c: f64,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Estimate<f64>> {
    cfg.validate()?;
    if !(a < c && c < b) {
        return Err(Error::Precondition(format!("singularity {c} must lie inside ({a}, {b})")));
    }
    let delta = (c - a).min(b - c);
    let tol = cfg.abs_tol * 1e-2;
    let pair = |t: f64| f(c + t) + f(c - t);
    let mut values = Vec::new();
    let mut qerr = 0.0;
    let mut eps_used = Vec::new();
    for &eps in &cfg.pv_epsilons {
        if eps >= delta {
            continue;
        }
        let e = adaptive(pair, eps, delta, &[], tol, cfg.rel_tol * 1e-3, cfg.max_panels);
        qerr += e.error;
        values.push(e.value);
        eps_used.push(eps);
    }
    if values.len() < 2 {
        return Err(Error::Precondition("excision radii must be smaller than the distance to the interval ends".into()));
    }
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if diffs.windows(2).any(|d| d[1] > d[0] && d[1] > tol) {
        return Err(Error::PvDivergence(values));
    }
    // J(ε) = J₀ − g(0)ε − g''(0)ε³/6 − …
    let (mut pv, last) = fit::extrapolate_to_zero(&eps_used, &values);
    let mut err = last + qerr;
    if !pv.is_finite() {
        pv = values[values.len() - 1];
        err = f64::INFINITY;
    }
    // outer remainder
    let (ra, rb) = if c - a > b - c { (a, c - delta) } else { (c + delta, b) };
    if rb > ra {
        let e = adaptive(&f, ra, rb, &[], tol, cfg.rel_tol * 1e-3, cfg.max_panels);
        pv += e.value;
        err += e.error;
    }
    Ok(Estimate { value: pv, error: err, evaluations: 0 })
}

/// `(1/2r) ∮_{|y|=r} f dσ` on the circle of radius `r` in ℝ², by the
/// trapezoidal rule with doubling until two levels agree.
pub fn sphere_average<F: Fn([f64; 2]) -> f64>(f: F, radius: f64, cfg: &QuadConfig) -> Result<Estimate<f64>> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let level = |n: usize| -> f64 {
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n)
            .map(|k| {
                let t = k as f64 * h;
                f([radius * t.cos(), radius * t.sin()])
            })
            .sum();
        0.5 * s * h
    };
    let mut n = 16;
    let mut prev = level(n);
    while n < 1 << 18 {
        n *= 2;
        let cur = level(n);
        let err = (cur - prev).abs();
        if err <= 1e-3 * cfg.abs_tol.max(cfg.rel_tol * cur.abs()) || err <= 1e-15 * cur.abs() {
            return Ok(Estimate { value: cur, error: err, evaluations: 2 * n });
        }
        prev = cur;
    }
    Err(Error::Quadrature { value: prev, error: f64::NAN })
}
