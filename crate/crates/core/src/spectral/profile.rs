use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss::GaussLegendre;
use crate::resolvent::{sphere_area, Dimension};
use crate::specfun::radial_fourier_kernel;

/// Nodes per panel of the profile quadrature grids.
pub(crate) const PANEL_NODES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Gaussian,
    Box,
    MexicanHat,
    Hermite,
    Algebraic,
    Sampled,
    Combination,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Gaussian => "gaussian",
            ProfileKind::Box => "box",
            ProfileKind::MexicanHat => "mexican_hat",
            ProfileKind::Hermite => "hermite",
            ProfileKind::Algebraic => "algebraic",
            ProfileKind::Sampled => "sampled",
            ProfileKind::Combination => "combination",
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    Gaussian { width: f64 },
    Box { half_width: f64 },
    MexicanHat { width: f64 },
    Hermite { width: f64 },
    Algebraic { delta: f64 },
    Sampled { spline: Arc<Spline> },
    Combination { terms: Vec<(f64, PotentialProfile)> },
}

/// One real potential profile `φ`, normalized in L² at construction.
///
/// In `d = 1` profiles may be translated and need not be even; in `d ≥ 2`
/// they are radial about the origin, which is what the radial resolvent
/// machinery assumes.
#[derive(Clone, Debug)]
pub struct PotentialProfile {
    d: Dimension,
    shape: Shape,
    center: f64,
    scale: f64,
    mass: f64,
    l2_norm: f64,
    decay_exponent: f64,
    smoothness_order: u32,
}

impl PotentialProfile {
    fn build(d: Dimension, shape: Shape, center: f64, decay: f64, smooth: u32) -> Result<Self> {
        if d.get() > 1 && center != 0.0 {
            return Err(Error::Unsupported("translated profiles in d ≥ 2".into()));
        }
        if decay <= d.get() as f64 + 2.0 {
            return Err(Error::Precondition(format!(
                "decay condition |φ(x)| ≲ ⟨x⟩^(−δ) needs δ > d + 2 = {}, got δ = {decay}",
                d.get() + 2
            )));
        }
        if d.get() >= 2 && smooth < d.get() / 2 {
            return Err(Error::Precondition(format!(
                "smoothness order β₀ = {smooth} below [d/2] = {}",
                d.get() / 2
            )));
        }
        let mut p = PotentialProfile {
            d,
            shape,
            center,
            scale: 1.0,
            mass: 0.0,
            l2_norm: 1.0,
            decay_exponent: decay,
            smoothness_order: smooth,
        };
        let n2 = p.integrate(|v| v * v).sqrt();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Invalid("profile has zero or infinite L² norm".into()));
        }
        p.scale = 1.0 / n2;
        p.l2_norm = p.integrate(|v| v * v).sqrt();
        p.mass = p.integrate(|v| v);
        Ok(p)
    }

    /// `e^{−|x|²/(2w²)}`.
    pub fn gaussian(d: Dimension, width: f64) -> Result<Self> {
        positive(width, "width")?;
        Self::build(d, Shape::Gaussian { width }, 0.0, f64::INFINITY, u32::MAX)
    }

    /// Indicator of `|x| ≤ h` (d = 1 only satisfies the smoothness condition).
    pub fn boxcar(d: Dimension, half_width: f64) -> Result<Self> {
        positive(half_width, "half width")?;
        Self::build(d, Shape::Box { half_width }, 0.0, f64::INFINITY, 0)
    }

    /// `(d − |x|²/w²) e^{−|x|²/(2w²)}`, which has zero mass.
    pub fn mexican_hat(d: Dimension, width: f64) -> Result<Self> {
        positive(width, "width")?;
        Self::build(d, Shape::MexicanHat { width }, 0.0, f64::INFINITY, u32::MAX)
    }

    /// `x e^{−x²/(2w²)}` in d = 1 (odd, zero mass).
    pub fn hermite(d: Dimension, width: f64) -> Result<Self> {
        positive(width, "width")?;
        if d.get() != 1 {
            return Err(Error::Unsupported("odd Hermite profile outside d = 1".into()));
        }
        Self::build(d, Shape::Hermite { width }, 0.0, f64::INFINITY, u32::MAX)
    }

    /// `⟨x⟩^{−δ} = (1 + |x|²)^{−δ/2}`.
    pub fn algebraic(d: Dimension, delta: f64) -> Result<Self> {
        positive(delta, "decay exponent")?;
        Self::build(d, Shape::Algebraic { delta }, 0.0, delta, u32::MAX)
    }

    /// Cubic-spline interpolant of samples `(x_k, φ_k)` (radial samples
    /// `(r_k, φ_k)` in d ≥ 2), zero outside the sampled range.
    pub fn sampled(d: Dimension, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let spline = Spline::new(xs, ys)?;
        if d.get() >= 2 && spline.xs[0] < 0.0 {
            return Err(Error::Invalid("radial samples need r ≥ 0".into()));
        }
        Self::build(d, Shape::Sampled { spline: Arc::new(spline) }, 0.0, f64::INFINITY, 2)
    }

    /// `Σ c_k φ_k`, renormalized.
    pub fn combination(terms: Vec<(f64, PotentialProfile)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Invalid("empty combination".into()))?;
        let d = first.1.d;
        if terms.iter().any(|(_, p)| p.d != d) {
            return Err(Error::Invalid("combined profiles must share a dimension".into()));
        }
        let decay = terms.iter().map(|(_, p)| p.decay_exponent).fold(f64::INFINITY, f64::min);
        let smooth = terms.iter().map(|(_, p)| p.smoothness_order).min().unwrap_or(0);
        Self::build(d, Shape::Combination { terms }, 0.0, decay, smooth)
    }

    /// Copy shifted by `c` (d = 1).
    pub fn translated(&self, c: f64) -> Result<Self> {
        let mut p = self.clone();
        if self.d.get() != 1 {
            return Err(Error::Unsupported("translated profiles in d ≥ 2".into()));
        }
        p.center += c;
        Ok(p)
    }

    /// `x ↦ φ(−x)` (d = 1; radial profiles are returned unchanged).
    pub fn reflected(&self) -> Result<Self> {
        if self.d.get() != 1 {
            return Ok(self.clone());
        }
        let mut p = self.clone();
        p.center = -self.center;
        p.shape = match &self.shape {
            Shape::Hermite { width } => {
                p.scale = -p.scale;
                Shape::Hermite { width: *width }
            }
            Shape::Sampled { spline } => Shape::Sampled { spline: Arc::new(spline.mirrored()) },
            Shape::Combination { terms } => Shape::Combination {
                terms: terms
                    .iter()
                    .map(|(c, q)| Ok((*c, q.reflected()?)))
                    .collect::<Result<Vec<_>>>()?,
            },
            other => other.clone(),
        };
        Ok(p)
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn kind(&self) -> ProfileKind {
        match self.shape {
            Shape::Gaussian { .. } => ProfileKind::Gaussian,
            Shape::Box { .. } => ProfileKind::Box,
            Shape::MexicanHat { .. } => ProfileKind::MexicanHat,
            Shape::Hermite { .. } => ProfileKind::Hermite,
            Shape::Algebraic { .. } => ProfileKind::Algebraic,
            Shape::Sampled { .. } => ProfileKind::Sampled,
            Shape::Combination { .. } => ProfileKind::Combination,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn smoothness_order(&self) -> u32 {
        self.smoothness_order
    }

    /// `φ` at a point given by its (signed, d = 1) coordinate or radius.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.scale * self.shape_value(x - self.center)
    }

    /// `φ(x)` for `x ∈ ℝ^d`.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        if self.d.get() == 1 {
            self.eval(x[0])
        } else {
            self.eval(x.iter().map(|v| v * v).sum::<f64>().sqrt())
        }
    }

    fn shape_value(&self, t: f64) -> f64 {
        let d = self.d.get() as f64;
        match &self.shape {
            Shape::Gaussian { width } => (-0.5 * (t / width).powi(2)).exp(),
            Shape::Box { half_width } => {
                if t.abs() <= *half_width {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::MexicanHat { width } => {
                let q = (t / width).powi(2);
                (d - q) * (-0.5 * q).exp()
            }
            Shape::Hermite { width } => t / width * (-0.5 * (t / width).powi(2)).exp(),
            Shape::Algebraic { delta } => (1.0 + t * t).powf(-0.5 * delta),
            Shape::Sampled { spline } => spline.eval(t),
            Shape::Combination { terms } => terms.iter().map(|(c, p)| c * p.eval(t)).sum(),
        }
    }

    /// Radius (about the center) beyond which `|φ|` is below `1e−16` of its scale.
    pub fn support_radius(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { width } => 9.0 * width,
            Shape::Box { half_width } => *half_width,
            Shape::MexicanHat { width } | Shape::Hermite { width } => 10.0 * width,
            Shape::Algebraic { delta } => 1e16f64.powf(1.0 / delta),
            Shape::Sampled { spline } => spline.xs[0].abs().max(spline.xs[spline.xs.len() - 1].abs()),
            Shape::Combination { terms } => terms
                .iter()
                .map(|(_, p)| p.center.abs() + p.support_radius())
                .fold(0.0, f64::max),
        }
    }

    /// `[lo, hi]` containing the support (d = 1: absolute coordinates; d ≥ 2: radii).
    pub fn extent(&self) -> (f64, f64) {
        let r = self.support_radius();
        if self.d.get() == 1 {
            (self.center - r, self.center + r)
        } else {
            (0.0, r)
        }
    }

    /// Length scale used to size quadrature panels.
    pub fn scale_length(&self) -> f64 {
        match &self.shape {
            Shape::Gaussian { width } | Shape::MexicanHat { width } | Shape::Hermite { width } => *width,
            Shape::Box { half_width } => *half_width,
            Shape::Algebraic { .. } => 1.0,
            Shape::Sampled { spline } => spline.min_spacing() * 4.0,
            Shape::Combination { terms } => {
                terms.iter().map(|(_, p)| p.scale_length()).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Points where `φ` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.shape {
            Shape::Box { half_width } => {
                if self.d.get() == 1 {
                    vec![-half_width, *half_width]
                } else {
                    vec![*half_width]
                }
            }
            Shape::Sampled { spline } => vec![spline.xs[0], spline.xs[spline.xs.len() - 1]],
            Shape::Combination { terms } => terms.iter().flat_map(|(_, p)| p.breakpoints()).collect(),
            _ => vec![],
        };
        for b in out.iter_mut() {
            *b += self.center;
        }
        out
    }

    /// Quadrature grid covering the support of `φ`.
    pub(crate) fn grid(&self) -> PanelGrid {
        let (lo, hi) = self.extent();
        let h = (0.5 * self.scale_length()).min(1.0);
        if self.d.get() == 1 {
            PanelGrid::new(lo, hi, &self.breakpoints(), h, false)
        } else {
            PanelGrid::new(0.0, hi, &self.breakpoints(), h, true)
        }
    }

    /// `∫ g(φ(x)) dx` over `ℝ^d`.
    fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let grid = self.grid();
        let meas = self.measure_factor();
        grid.nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&x, &w)| w * meas(x) * g(self.eval(x)))
            .sum()
    }

    /// Radial measure density `|S^{d−1}| r^{d−1}` (1 in d = 1).
    pub(crate) fn measure_factor(&self) -> impl Fn(f64) -> f64 {
        let d = self.d.get();
        let area = sphere_area(d);
        move |r: f64| if d == 1 { 1.0 } else { area * r.powi(d as i32 - 1) }
    }

    /// `⟨φ, ψ⟩`.
    pub fn inner(&self, other: &PotentialProfile) -> Result<f64> {
        if self.d != other.d {
            return Err(Error::Invalid("profiles of different dimensions".into()));
        }
        let (a0, a1) = self.extent();
        let (b0, b1) = other.extent();
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        if lo >= hi {
            return Ok(0.0);
        }
        let mut br = self.breakpoints();
        br.extend(other.breakpoints());
        let h = (0.5 * self.scale_length().min(other.scale_length())).min(1.0);
        let grid = PanelGrid::new(lo, hi, &br, h, self.d.get() > 1);
        let meas = self.measure_factor();
        Ok(grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(&x, &w)| w * meas(x) * self.eval(x) * other.eval(x))
            .sum())
    }

    /// `φ̂(ξ) = ∫ e^{−iξ·x} φ(x) dx`; in d ≥ 2 the argument is `|ξ|` and the
    /// value is real.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let d = self.d.get();
        let (lo, hi) = self.extent();
        let h = (0.5 * self.scale_length()).min(1.0).min(3.0 / xi.abs().max(1e-300));
        let grid = PanelGrid::new(lo, hi, &self.breakpoints(), h, d > 1);
        if d == 1 {
            grid.nodes
                .iter()
                .zip(&grid.weights)
                .map(|(&x, &w)| Complex64::cis(-xi * x) * (w * self.eval(x)))
                .sum()
        } else {
            let v: f64 = grid
                .nodes
                .iter()
                .zip(&grid.weights)
                .map(|(&r, &w)| {
                    let k = radial_fourier_kernel(d, xi * r).expect("dimension checked at construction");
                    w * self.eval(r) * k * r.powi(d as i32 - 1)
                })
                .sum();
            Complex64::new(v, 0.0)
        }
    }

    /// Closed-form `∫φ` for the unit-width centered Gaussian, `2^{d/2} π^{d/4}`.
    pub fn gaussian_mass(d: u32) -> f64 {
        2f64.powf(d as f64 / 2.0) * PI.powf(d as f64 / 4.0)
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} must be positive, got {v}")))
    }
}

/// Composite Gauss–Legendre grid on `[lo, hi]` with panel edges at the
/// breakpoints; `graded` adds dyadic panels toward `lo` (radial grids).
#[derive(Clone, Debug)]
pub(crate) struct PanelGrid {
    pub edges: Vec<f64>,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelGrid {
    pub fn new(lo: f64, hi: f64, breaks: &[f64], h: f64, graded: bool) -> Self {
        let mut cuts: Vec<f64> = vec![lo, hi];
        cuts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![lo];
        if graded {
            let first = (lo + h).min(hi);
            let mut e: Vec<f64> = (1..=30).map(|k| lo + (first - lo) * 0.5f64.powi(k)).collect();
            e.reverse();
            edges.extend(e);
        }
        for w in cuts.windows(2) {
            let (a, b) = (w[0].max(*edges.last().expect("edge")), w[1]);
            if b <= a {
                continue;
            }
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            for k in 1..=n {
                edges.push(if k == n { b } else { a + (b - a) * k as f64 / n as f64 });
            }
        }
        let rule = GaussLegendre::cached(PANEL_NODES);
        let mut nodes = Vec::with_capacity(edges.len() * PANEL_NODES);
        let mut weights = Vec::with_capacity(edges.len() * PANEL_NODES);
        for w in edges.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        PanelGrid { edges, nodes, weights }
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    /// Panel index containing `x` (clamped), by bisection on the edges.
    pub fn locate(&self, x: f64) -> usize {
        match self.edges.binary_search_by(|e| e.total_cmp(&x)) {
            Ok(i) => i.min(self.panels() - 1),
            Err(i) => i.saturating_sub(1).min(self.panels() - 1),
        }
    }
}

/// Natural cubic spline.
#[derive(Clone, Debug)]
pub(crate) struct Spline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 4 || ys.len() != n {
            return Err(Error::Invalid("sampled profile needs ≥ 4 (x, φ) pairs".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("sample abscissae must be finite and strictly increasing".into()));
        }
        // tridiagonal system for second derivatives, natural ends
        let mut a = vec![0.0; n];
        let mut b = vec![1.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0 / 6.0;
            b[i] = (h0 + h1) / 3.0;
            c[i] = h1 / 6.0;
            r[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(Spline { xs, ys, m })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let s = (self.xs[i + 1] - x) / h;
        let t = (x - self.xs[i]) / h;
        s * self.ys[i]
            + t * self.ys[i + 1]
            + ((s * s * s - s) * self.m[i] + (t * t * t - t) * self.m[i + 1]) * h * h / 6.0
    }

    fn min_spacing(&self) -> f64 {
        self.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    fn mirrored(&self) -> Spline {
        let xs: Vec<f64> = self.xs.iter().rev().map(|x| -x).collect();
        let ys: Vec<f64> = self.ys.iter().rev().copied().collect();
        let m: Vec<f64> = self.m.iter().rev().copied().collect();
        Spline { xs, ys, m }
    }
}
