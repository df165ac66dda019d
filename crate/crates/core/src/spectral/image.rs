//! `u(x) = ∫ K(x, y) φ(y) dy` for kernels that separate as
//! `Σ_t c·P_t(min(x, y)) Q_t(max(x, y))`: ordering along the line in d = 1
//! and spherical averages over radii in d ≥ 2.
//!
//! Cumulative integrals are tabulated on panel edges once; evaluation at a
//! point adds the partial panel containing it, so the result is exact to the
//! panel quadrature everywhere, including inside the support.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::profile::{PanelGrid, PotentialProfile, PANEL_NODES};
use crate::error::{Error, Result};
use crate::quadrature::gauss::GaussLegendre;
use crate::resolvent::{fundamental_constant, Dimension};
use crate::specfun;
use crate::Sign;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Kernels available through the separable machinery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec {
    /// `R₀^±(λ²)`.
    Free(Sign, f64),
    /// `G₀`: `−|x−y|/2`, `−(1/2π) log|x−y|`, or `c|x−y|^{2−d}`.
    Fundamental,
    /// `|x − y|` (d = 1).
    Abs,
    /// `R₀^+(λ²) − R₀^−(λ²)`.
    SpectralMeasure(f64),
}

impl KernelSpec {
    fn lambda(self) -> Option<f64> {
        match self {
            KernelSpec::Free(_, l) | KernelSpec::SpectralMeasure(l) => Some(l),
            _ => None,
        }
    }
}

/// The factors `P_t`, `Q_t` and overall constant of a separable kernel.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Separable {
    d: u32,
    spec: KernelSpec,
    terms: usize,
    factor: Complex64,
}

impl Separable {
    pub fn new(d: Dimension, spec: KernelSpec) -> Result<Self> {
        let dd = d.get();
        if let Some(l) = spec.lambda() {
            if !(l > 0.0) {
                return Err(Error::Domain(format!("λ must be positive, got {l}")));
            }
        }
        let i = Complex64::new(0.0, 1.0);
        let (terms, factor) = match (dd, spec) {
            (1, KernelSpec::Free(s, l)) => (1, i * s.as_f64() / (2.0 * l)),
            (1, KernelSpec::Fundamental) => (2, Complex64::new(-0.5, 0.0)),
            (1, KernelSpec::Abs) => (2, Complex64::new(1.0, 0.0)),
            (1, KernelSpec::SpectralMeasure(l)) => (2, i / l),
            (2, KernelSpec::Free(s, _)) => (1, i * s.as_f64() * 0.25),
            (2, KernelSpec::Fundamental) => (1, Complex64::new(-1.0 / (2.0 * PI), 0.0)),
            (2, KernelSpec::SpectralMeasure(_)) => (1, i * 0.5),
            (3, KernelSpec::Free(_, l)) => (1, Complex64::new(1.0 / (4.0 * PI * l), 0.0)),
            (3, KernelSpec::SpectralMeasure(l)) => (1, i / (2.0 * PI * l)),
            (3 | 5 | 7, KernelSpec::Fundamental) => (1, Complex64::new(fundamental_constant(dd), 0.0)),
            _ => {
                return Err(Error::Unsupported(format!("kernel {spec:?} in dimension {dd}")));
            }
        };
        Ok(Separable { d: dd, spec, terms, factor })
    }

    /// `(P_t(t), Q_t(t))` for every term.
    #[inline]
    pub fn pq(&self, t: f64) -> ([Complex64; 2], [Complex64; 2]) {
        let c = |v: f64| Complex64::new(v, 0.0);
        match (self.d, self.spec) {
            (1, KernelSpec::Free(s, l)) => {
                let e = Complex64::cis(s.as_f64() * l * t);
                ([e.conj(), ZERO], [e, ZERO])
            }
            (1, KernelSpec::Fundamental | KernelSpec::Abs) => ([c(1.0), c(-t)], [c(t), c(1.0)]),
            (1, KernelSpec::SpectralMeasure(l)) => {
                let (s, co) = (l * t).sin_cos();
                ([c(co), c(s)], [c(co), c(s)])
            }
            (2, KernelSpec::Free(s, l)) => {
                let z = l * t;
                if z == 0.0 {
                    return ([c(1.0), ZERO], [c(f64::INFINITY), ZERO]);
                }
                let (j, y) = specfun::jy_any(0, z);
                ([c(j), ZERO], [Complex64::new(j, s.as_f64() * y), ZERO])
            }
            (2, KernelSpec::Fundamental) => ([c(1.0), ZERO], [c(t.ln()), ZERO]),
            (2, KernelSpec::SpectralMeasure(l)) => {
                let j = specfun::j0(l * t);
                ([c(j), ZERO], [c(j), ZERO])
            }
            (3, KernelSpec::Free(s, l)) => {
                let p = if t == 0.0 { l } else { (l * t).sin() / t };
                ([c(p), ZERO], [Complex64::cis(s.as_f64() * l * t) / t, ZERO])
            }
            (3, KernelSpec::SpectralMeasure(l)) => {
                let p = if t == 0.0 { l } else { (l * t).sin() / t };
                ([c(p), ZERO], [c(p), ZERO])
            }
            (d, KernelSpec::Fundamental) => ([c(1.0), ZERO], [c(t.powi(2 - d as i32)), ZERO]),
            _ => unreachable!("validated in Separable::new"),
        }
    }
}

/// Panel size that resolves both the profile and the phase of the kernel.
pub(crate) fn panel_width(profile: &PotentialProfile, spec: KernelSpec) -> f64 {
    let base = (0.5 * profile.scale_length()).min(1.0);
    match spec.lambda() {
        Some(l) => base.min(6.0 / l),
        None => base,
    }
}

/// A profile's grid for a given panel width.
pub(crate) fn profile_grid(profile: &PotentialProfile, h: f64) -> PanelGrid {
    let (lo, hi) = profile.extent();
    PanelGrid::new(lo, hi, &profile.breakpoints(), h, profile.dimension().get() > 1)
}

/// Precomputed quadrature for evaluating an image at one point; independent
/// of the kernel, so it can be reused across `λ`.
#[derive(Clone, Debug)]
pub struct PointPlan {
    x: f64,
    location: Location,
    left: [(f64, f64); PANEL_NODES],
    right: [(f64, f64); PANEL_NODES],
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Location {
    Below,
    Above,
    Inside(usize),
}

/// Tabulated image `u = Kφ`.
#[derive(Clone, Debug)]
pub struct Image {
    sep: Separable,
    grid: PanelGrid,
    d: u32,
    /// `∫_{lo}^{e_k} P_t φ dμ`
    left: Vec<[Complex64; 2]>,
    /// `∫_{e_k}^{hi} Q_t φ dμ`
    right: Vec<[Complex64; 2]>,
}

impl Image {
    pub fn new(profile: &PotentialProfile, spec: KernelSpec) -> Result<Self> {
        Self::with_width(profile, spec, panel_width(profile, spec))
    }

    pub(crate) fn with_width(profile: &PotentialProfile, spec: KernelSpec, h: f64) -> Result<Self> {
        let sep = Separable::new(profile.dimension(), spec)?;
        let grid = profile_grid(profile, h);
        Ok(Self::from_grid(profile, sep, grid))
    }

    fn from_grid(profile: &PotentialProfile, sep: Separable, grid: PanelGrid) -> Self {
        let meas = profile.measure_factor();
        let np = grid.panels();
        let mut panel_p = vec![[ZERO; 2]; np];
        let mut panel_q = vec![[ZERO; 2]; np];
        for k in 0..np {
            for idx in k * PANEL_NODES..(k + 1) * PANEL_NODES {
                let x = grid.nodes[idx];
                let w = grid.weights[idx] * meas(x) * profile.eval(x);
                if w == 0.0 {
                    continue;
                }
                let (p, q) = sep.pq(x);
                for t in 0..sep.terms {
                    panel_p[k][t] += p[t] * w;
                    panel_q[k][t] += q[t] * w;
                }
            }
        }
        let mut left = vec![[ZERO; 2]; np + 1];
        for k in 0..np {
            for t in 0..2 {
                left[k + 1][t] = left[k][t] + panel_p[k][t];
            }
        }
        let mut right = vec![[ZERO; 2]; np + 1];
        for k in (0..np).rev() {
            for t in 0..2 {
                right[k][t] = right[k + 1][t] + panel_q[k][t];
            }
        }
        Image { sep, grid, d: profile.dimension().get(), left, right }
    }

    /// Plan for evaluating any image of `profile` at `x` (radius in d ≥ 2).
    pub fn plan(profile: &PotentialProfile, grid_h: f64, x: f64) -> PointPlan {
        let grid = profile_grid(profile, grid_h);
        plan_on(&grid, profile, x)
    }

    /// `u(x)`.
    pub fn eval(&self, profile: &PotentialProfile, x: f64) -> Complex64 {
        let plan = plan_on(&self.grid, profile, x);
        self.eval_planned(&plan)
    }

    /// `u(x)` with the partial-panel quadrature taken from `plan`, which must
    /// come from the same profile and panel width.
    pub fn eval_planned(&self, plan: &PointPlan) -> Complex64 {
        let x = plan.x;
        let n = self.sep.terms;
        let (px, qx) = self.sep.pq(x);
        let mut acc = ZERO;
        match plan.location {
            Location::Below => {
                for t in 0..n {
                    acc += px[t] * self.right[0][t];
                }
            }
            Location::Above => {
                let last = self.left.len() - 1;
                for t in 0..n {
                    acc += qx[t] * self.left[last][t];
                }
            }
            Location::Inside(k) => {
                let mut l = self.left[k];
                let mut r = self.right[k + 1];
                for &(y, w) in &plan.left {
                    if w != 0.0 {
                        let (p, _) = self.sep.pq(y);
                        for t in 0..n {
                            l[t] += p[t] * w;
                        }
                    }
                }
                for &(y, w) in &plan.right {
                    if w != 0.0 {
                        let (_, q) = self.sep.pq(y);
                        for t in 0..n {
                            r[t] += q[t] * w;
                        }
                    }
                }
                let radial_origin = self.d > 1 && x == 0.0;
                for t in 0..n {
                    if !radial_origin {
                        acc += qx[t] * l[t];
                    }
                    acc += px[t] * r[t];
                }
            }
        }
        self.sep.factor * acc
    }

    /// `∫ u ψ dμ` over the grid of `psi` with the same panel width.
    pub fn pair(&self, profile: &PotentialProfile, psi: &PotentialProfile) -> Complex64 {
        let h = self.grid.edges.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let grid = profile_grid(psi, h);
        let meas = psi.measure_factor();
        let mut acc = ZERO;
        for (&x, &w) in grid.nodes.iter().zip(&grid.weights) {
            let v = psi.eval(x);
            if v == 0.0 {
                continue;
            }
            acc += self.eval(profile, x) * (w * meas(x) * v);
        }
        acc
    }
}

fn plan_on(grid: &PanelGrid, profile: &PotentialProfile, x: f64) -> PointPlan {
    let lo = grid.edges[0];
    let hi = grid.edges[grid.edges.len() - 1];
    let empty = [(0.0, 0.0); PANEL_NODES];
    let location = if x <= lo {
        Location::Below
    } else if x >= hi {
        Location::Above
    } else {
        Location::Inside(grid.locate(x))
    };
    let mut plan = PointPlan { x, location, left: empty, right: empty };
    if let Location::Inside(k) = location {
        let rule = GaussLegendre::cached(PANEL_NODES);
        let meas = profile.measure_factor();
        let (a, b) = (grid.edges[k], grid.edges[k + 1]);
        for (slot, (y, w)) in plan.left.iter_mut().zip(rule.mapped(a, x)) {
            *slot = (y, w * meas(y) * profile.eval(y));
        }
        for (slot, (y, w)) in plan.right.iter_mut().zip(rule.mapped(x, b)) {
            *slot = (y, w * meas(y) * profile.eval(y));
        }
    }
    plan
}

/// `∬ K(x, y) φ_i(y) φ_j(x) dy dx`, with the error estimated from a second
/// evaluation on panels of half the width.
pub(crate) fn paired_integral(
    phi_i: &PotentialProfile,
    phi_j: &PotentialProfile,
    spec: KernelSpec,
) -> Result<(Complex64, f64)> {
    if phi_i.dimension() != phi_j.dimension() {
        return Err(Error::Invalid("profiles of different dimensions".into()));
    }
    let h = panel_width(phi_i, spec).min(panel_width(phi_j, spec));
    let coarse = Image::with_width(phi_i, spec, h)?.pair(phi_i, phi_j);
    let fine = Image::with_width(phi_i, spec, 0.5 * h)?.pair(phi_i, phi_j);
    Ok((fine, (fine - coarse).norm() + 1e-15 * fine.norm()))
}
