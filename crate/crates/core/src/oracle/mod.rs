//! Periodic-box ground truth: the spectral Laplacian `H₀`, the sampled
//! projections, exact resolvents and the time-domain wave-operator limit.

mod compare;
mod eigen;
mod gmres;

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature::gauss::GaussLegendre;
use crate::resolvent::Dimension;
use crate::spectral::{PerturbationModel, PotentialProfile};

pub use compare::{compare_stationary_vs_time, CompareReport};
pub use eigen::Spectrum;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Periodic box `[−L, L)^d` with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub d: Dimension,
    pub half_length: f64,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(d: Dimension, half_length: f64, points_per_axis: usize) -> Result<Self> {
        let min_n = match d.get() {
            1 => 256,
            2 => 64,
            k => return Err(Error::Unsupported(format!("oracle grids in dimension {k}"))),
        };
        if !points_per_axis.is_power_of_two() || points_per_axis < min_n {
            return Err(Error::Invalid(format!(
                "points per axis must be a power of two ≥ {min_n}, got {points_per_axis}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::Invalid(format!("half length must be positive, got {half_length}")));
        }
        Ok(GridSpec { d, half_length, points_per_axis })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.d.get())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis coordinates `−L + jh`.
    pub fn axis(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points_per_axis).map(|j| -self.half_length + j as f64 * h).collect()
    }

    /// Cell volume `h^d`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.d.get() as i32)
    }

    /// Grid points, row-major in d = 2.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let ax = self.axis();
        match self.d.get() {
            1 => ax.iter().map(|&x| vec![x]).collect(),
            _ => ax.iter().flat_map(|&x| ax.iter().map(move |&y| vec![x, y])).collect(),
        }
    }

    /// Angular frequencies of the DFT ordering along one axis.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points_per_axis as i64;
        let k0 = PI / self.half_length;
        (0..n).map(|k| if k < n / 2 { k } else { k - n }).map(|k| k as f64 * k0).collect()
    }

    /// `|ξ|²` per Fourier coefficient.
    pub fn symbol(&self) -> Vec<f64> {
        let f = self.frequencies();
        match self.d.get() {
            1 => f.iter().map(|x| x * x).collect(),
            _ => f.iter().flat_map(|&a| f.iter().map(move |&b| a * a + b * b)).collect(),
        }
    }
}

/// Unitary DFT on the grid.
#[derive(Clone)]
pub struct Fourier {
    d: u32,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fourier(d={}, n={})", self.d, self.n)
    }
}

impl Fourier {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis;
        Fourier { d: grid.d.get(), n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn run(&self, x: &[Complex64], plan: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
        let n = self.n;
        let mut y = x.to_vec();
        match self.d {
            1 => plan.process(&mut y),
            _ => {
                plan.process(&mut y);
                let mut col = vec![ZERO; n];
                for c in 0..n {
                    for r in 0..n {
                        col[r] = y[r * n + c];
                    }
                    plan.process(&mut col);
                    for r in 0..n {
                        y[r * n + c] = col[r];
                    }
                }
            }
        }
        let s = 1.0 / (y.len() as f64).sqrt();
        y.iter_mut().for_each(|v| *v *= s);
        y
    }

    pub fn forward(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.run(x, &self.fwd)
    }

    pub fn inverse(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.run(x, &self.inv)
    }
}

/// Construction-time comparison of the sampled profiles with the continuum.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizationReport {
    pub grid_mass: Vec<f64>,
    pub continuum_mass: Vec<f64>,
    pub norm_drift: Vec<f64>,
    pub orthonormality_drift: f64,
}

/// `H = H₀ + Σ α_j ⟨·, φ_j⟩φ_j` on the grid. Vectors carry the factor
/// `h^{d/2}` so that the Euclidean norm is the discrete `L²` norm.
#[derive(Clone, Debug)]
pub struct DiscreteModel {
    pub grid: GridSpec,
    pub h0_symbol: Vec<f64>,
    /// Sampled, renormalized `φ_j` in grid space.
    pub projections: Vec<Vec<Complex64>>,
    /// The same in Fourier space.
    pub projections_hat: Vec<Vec<Complex64>>,
    pub coupling: Vec<f64>,
    pub report: DiscretizationReport,
    /// Radius beyond which every `|φ_j|` is below `1e−6` of its maximum.
    pub profile_reach: f64,
    fourier: Fourier,
    spectrum: OnceLock<Spectrum>,
}

/// Sample the model on the box and renormalize each `φ_j` on the grid.
pub fn discretize(model: &PerturbationModel, grid: GridSpec) -> Result<DiscreteModel> {
    if model.dimension() != grid.d {
        return Err(Error::Invalid("model and grid dimensions differ".into()));
    }
    let profiles = model.profiles();
    for p in &profiles {
        if grid.half_length < 8.0 * p.scale_length() {
            return Err(Error::Precondition(format!(
                "box half-length {} is below 8× the profile scale {}",
                grid.half_length,
                p.scale_length()
            )));
        }
    }
    let pts = grid.points();
    let cell = grid.cell();
    let sqrt_cell = cell.sqrt();
    let l = grid.half_length;
    let fourier = Fourier::new(&grid);
    let mut projections = Vec::new();
    let mut projections_hat = Vec::new();
    let mut grid_mass = Vec::new();
    let mut continuum_mass = Vec::new();
    let mut norm_drift = Vec::new();
    let mut reach: f64 = 0.0;
    for p in &profiles {
        let vals: Vec<f64> = pts.iter().map(|x| p.eval_point(x)).collect();
        let peak = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let edge = pts
            .iter()
            .zip(&vals)
            .filter(|(x, _)| x.iter().any(|c| (c.abs() - l).abs() < 0.5 * grid.spacing() || c.abs() >= l - 1e-12))
            .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        if edge > 1e-8 * peak {
            return Err(Error::BoundaryLeakage(edge / peak));
        }
        reach = reach.max(radius_above(&pts, &vals, 1e-6 * peak));
        let norm2: f64 = vals.iter().map(|v| v * v).sum::<f64>() * cell;
        let mass: f64 = vals.iter().sum::<f64>() * cell;
        grid_mass.push(mass);
        continuum_mass.push(p.mass());
        norm_drift.push((norm2.sqrt() - 1.0).abs());
        let s = sqrt_cell / norm2.sqrt();
        let v: Vec<Complex64> = vals.iter().map(|&x| Complex64::new(x * s, 0.0)).collect();
        projections_hat.push(fourier.forward(&v));
        projections.push(v);
    }
    let mut ortho: f64 = 0.0;
    for i in 0..projections.len() {
        for j in 0..projections.len() {
            let g: Complex64 = projections[i].iter().zip(&projections[j]).map(|(a, b)| a * b.conj()).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((g - target).norm());
        }
    }
    Ok(DiscreteModel {
        grid,
        h0_symbol: grid.symbol(),
        projections,
        projections_hat,
        coupling: model.couplings(),
        report: DiscretizationReport { grid_mass, continuum_mass, norm_drift, orthonormality_drift: ortho },
        profile_reach: reach,
        fourier,
        spectrum: OnceLock::new(),
    })
}

fn radius_above(pts: &[Vec<f64>], vals: &[f64], level: f64) -> f64 {
    pts.iter()
        .zip(vals)
        .filter(|(_, v)| v.abs() > level)
        .map(|(x, _)| x.iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

impl DiscreteModel {
    pub fn rank(&self) -> usize {
        self.projections.len()
    }

    pub fn fourier(&self) -> &Fourier {
        &self.fourier
    }

    /// Samples of a function on the grid, scaled by `h^{d/2}`.
    pub fn sample<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        let s = self.grid.cell().sqrt();
        self.grid.points().iter().map(|x| f(x) * s).collect()
    }

    /// Inverse of [`DiscreteModel::sample`]'s scaling.
    pub fn unscale(&self, v: &[Complex64]) -> Vec<Complex64> {
        let s = 1.0 / self.grid.cell().sqrt();
        v.iter().map(|x| x * s).collect()
    }

    /// Eigen-decomposition of `H` in Fourier coordinates (built once).
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let mut s = Spectrum::diagonal(self.h0_symbol.clone());
        for (a, z) in self.coupling.iter().zip(&self.projections_hat) {
            s.add_rank_one(*a, z)?;
        }
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// `H u` for a grid vector.
    pub fn apply_h(&self, u: &[Complex64]) -> Vec<Complex64> {
        let uh = self.fourier.forward(u);
        let lap: Vec<Complex64> = uh.iter().zip(&self.h0_symbol).map(|(v, s)| v * s).collect();
        let mut out = self.fourier.inverse(&lap);
        for (a, p) in self.coupling.iter().zip(&self.projections) {
            let c = dot(u, p) * a;
            for (o, pv) in out.iter_mut().zip(p) {
                *o += pv * c;
            }
        }
        out
    }
}

fn check_resolvent_point(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::Domain(format!("z = {z} lies on the spectrum [0, ∞)")));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("z = {z} is not finite")));
    }
    Ok(())
}

/// `(H₀ − z)^{-1}` in Fourier coordinates.
fn free_resolvent_hat(dm: &DiscreteModel, z: Complex64, rhs_hat: &[Complex64]) -> Vec<Complex64> {
    rhs_hat.iter().zip(&dm.h0_symbol).map(|(v, s)| v / (s - z)).collect()
}

/// `(H₀ − z)^{-1} rhs` or, with `perturbed`, `(H − z)^{-1} rhs` by the
/// finite-rank (Woodbury) update. Grid vectors in, grid vectors out.
pub fn resolvent_direct(dm: &DiscreteModel, z: Complex64, rhs: &[Complex64], perturbed: bool) -> Result<Vec<Complex64>> {
    check_resolvent_point(z)?;
    if rhs.len() != dm.grid.len() {
        return Err(Error::Invalid("right-hand side has the wrong length".into()));
    }
    let rh = dm.fourier.forward(rhs);
    let mut u = free_resolvent_hat(dm, z, &rh);
    let n = dm.rank();
    if perturbed && n > 0 {
        let cols: Vec<Vec<Complex64>> = dm.projections_hat.iter().map(|p| free_resolvent_hat(dm, z, p)).collect();
        // R = R₀ − R₀Φ C (I + Φ^*R₀Φ C)^{-1} Φ^* R₀
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            Complex64::new(delta, 0.0) + dot(&cols[j], &dm.projections_hat[i]) * dm.coupling[j]
        });
        let b = nalgebra::DVector::from_fn(n, |i, _| dot(&u, &dm.projections_hat[i]));
        let lu = m.lu();
        let det = lu.determinant().norm();
        let c = lu.solve(&b).ok_or(Error::Conditioning(det))?;
        for j in 0..n {
            let w = c[j] * dm.coupling[j];
            for (o, r) in u.iter_mut().zip(&cols[j]) {
                *o -= r * w;
            }
        }
    }
    Ok(dm.fourier.inverse(&u))
}

/// Residuals of the Aronszajn–Krein identity at one `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct AkReport {
    pub z: Complex64,
    /// `max_j ‖R φ_j − [R₀Φ(I + CΦ^*R₀Φ)^{-1}]_j‖/‖·‖`, with `R φ_j` from
    /// Krylov solves of `(H − z)u = φ_j`.
    pub residual: f64,
    /// `N = 1`: difference between the scalar form `R₀φ/(1 + α⟨R₀φ, φ⟩)` and
    /// the matrix form.
    pub scalar_form_difference: Option<f64>,
    pub det: f64,
    pub iterations: usize,
}

/// Compare `R(z)Φ` from Krylov solves against the finite-rank formula.
pub fn ak_identity_check(dm: &DiscreteModel, z: Complex64) -> Result<AkReport> {
    check_resolvent_point(z)?;
    let n = dm.rank();
    let r0: Vec<Vec<Complex64>> = dm.projections_hat.iter().map(|p| free_resolvent_hat(dm, z, p)).collect();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta, 0.0) + dot(&r0[j], &dm.projections_hat[i]) * dm.coupling[i]
    });
    let lu = m.clone().lu();
    let det = lu.determinant().norm();
    if !(det > 1e-12) {
        return Err(Error::Conditioning(det));
    }
    let minv = lu.try_inverse().ok_or(Error::Conditioning(det))?;
    // operator u ↦ u + R₀ Σ α_k ⟨u, φ_k⟩ φ_k in Fourier coordinates
    let op = |u: &[Complex64]| -> Vec<Complex64> {
        let mut out = u.to_vec();
        for (k, p) in dm.projections_hat.iter().enumerate() {
            let c = dot(u, p) * dm.coupling[k];
            for (o, r) in out.iter_mut().zip(&r0[k]) {
                *o += r * c;
            }
        }
        out
    };
    let mut residual: f64 = 0.0;
    let mut iterations = 0;
    let mut formula_cols = Vec::new();
    for j in 0..n {
        let (lhs, its) = gmres::solve(&op, &r0[j], 1e-15, 60)?;
        iterations = iterations.max(its);
        let mut rhs = vec![ZERO; lhs.len()];
        for k in 0..n {
            let w = minv[(k, j)];
            for (o, r) in rhs.iter_mut().zip(&r0[k]) {
                *o += r * w;
            }
        }
        let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        residual = residual.max(norm(&diff) / norm(&rhs));
        formula_cols.push(rhs);
    }
    let scalar_form_difference = (n == 1).then(|| {
        let f = dot(&r0[0], &dm.projections_hat[0]);
        let s = Complex64::new(1.0, 0.0) / (f * dm.coupling[0] + 1.0);
        let diff: Vec<Complex64> = r0[0].iter().zip(&formula_cols[0]).map(|(a, b)| a * s - b).collect();
        norm(&diff) / norm(&formula_cols[0])
    });
    Ok(AkReport { z, residual, scalar_form_difference, det, iterations })
}

/// Time averaging of `e^{itH}e^{−itH₀}f` toward `t → −∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    /// Uniform mean over `t ∈ [−2T, −T]`.
    Window,
    /// Weights `e^{−s/T}/T` over `s = −t ∈ [0, 2T]`, renormalized.
    Abel,
}

impl Averaging {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "window" => Ok(Averaging::Window),
            "abel" => Ok(Averaging::Abel),
            _ => Err(Error::Invalid(format!("unknown averaging '{s}'"))),
        }
    }
}

/// Time-domain approximation of `W₋f`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeLimit {
    /// Grid vector (scaled by `h^{d/2}`).
    pub values: Vec<Complex64>,
    pub isometry: f64,
    pub t: f64,
    /// Largest time `2T` permitted by the wrap-around guard.
    pub t_limit: f64,
}

/// Reach, band speed and wrap-safe time horizon of a grid vector.
pub fn wrap_horizon(dm: &DiscreteModel, f: &[Complex64]) -> f64 {
    let peak = f.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let pts = dm.grid.points();
    let mags: Vec<f64> = f.iter().map(|v| v.norm()).collect();
    let rf = radius_above(&pts, &mags, 1e-6 * peak);
    let fh = dm.fourier.forward(f);
    let hpeak = fh.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let kmax = fh
        .iter()
        .zip(&dm.h0_symbol)
        .filter(|(v, _)| v.norm() > 1e-6 * hpeak)
        .map(|(_, s)| s.sqrt())
        .fold(0.0, f64::max);
    let v = 2.0 * kmax;
    let room = 2.0 * dm.grid.half_length - rf - dm.profile_reach;
    if v == 0.0 {
        f64::INFINITY
    } else {
        room.max(0.0) / v
    }
}

/// `s-lim_{t→−∞} e^{itH}e^{−itH₀}f`, averaged over `[−2T, −T]` (or with Abel
/// weights), with `e^{itH}` from the exact eigen-decomposition.
pub fn wave_operator_time_limit(dm: &DiscreteModel, f: &[Complex64], t: f64, averaging: Averaging) -> Result<TimeLimit> {
    if f.len() != dm.grid.len() {
        return Err(Error::Invalid("state has the wrong length".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("T must be positive, got {t}")));
    }
    let limit = wrap_horizon(dm, f);
    if 2.0 * t > limit {
        return Err(Error::WrapAround { reach: 2.0 * t, limit });
    }
    let fnorm = norm(f);
    if dm.coupling.iter().all(|&a| a == 0.0) || dm.rank() == 0 {
        return Ok(TimeLimit { values: f.to_vec(), isometry: 1.0, t, t_limit: limit });
    }
    let sp = dm.spectrum()?;
    let fh = dm.fourier.forward(f);
    let g = GaussLegendre::cached(24);
    let nodes: Vec<(f64, f64)> = match averaging {
        Averaging::Window => g.mapped(-2.0 * t, -t).into_iter().map(|(s, w)| (s, w / t)).collect(),
        Averaging::Abel => {
            let total = 1.0 - (-2.0f64).exp();
            g.mapped(0.0, 2.0 * t).into_iter().map(|(s, w)| (-s, w * (-s / t).exp() / (t * total))).collect()
        }
    };
    let mut acc = vec![ZERO; fh.len()];
    for (s, w) in nodes {
        let free: Vec<Complex64> = fh.iter().zip(&dm.h0_symbol).map(|(v, k)| v * Complex64::cis(-s * k)).collect();
        let out = sp.exp_i(s, &free);
        for (a, o) in acc.iter_mut().zip(out) {
            *a += o * w;
        }
    }
    let values = dm.fourier.inverse(&acc);
    let isometry = norm(&values) / fnorm;
    Ok(TimeLimit { values, isometry, t, t_limit: limit })
}

/// Sampled `φ` for d = 1 tests and comparisons.
pub fn sample_profile(dm: &DiscreteModel, p: &PotentialProfile) -> Vec<Complex64> {
    dm.sample(|x| Complex64::new(p.eval_point(x), 0.0))
}

#[cfg(test)]
mod tests;
