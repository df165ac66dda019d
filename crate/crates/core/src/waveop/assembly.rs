//! Two-stage stationary assembly: `v_k(λ)`, `Γ(λ)` and the images
//! `u_j(λ, x) = R₀^+(λ²)φ_j(x)` are produced per `λ` node and folded into the
//! outer `λ` integral for every output point at once.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{Grid, SampledField};
use super::WaveOpConfig;
use crate::error::{Error, Result};
use crate::quadrature::gauss::kronrod_rule;
use crate::resolvent::sphere_area;
use crate::spectral::image::{panel_width, Image, KernelSpec, PointPlan};
use crate::spectral::{gamma_matrix, CMatrix, PotentialProfile};
use crate::specfun::radial_fourier_kernel;
use crate::Sign;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Outer panels handled per parallel task.
const PANEL_CHUNK: usize = 16;

/// Largest `λ` ever integrated to.
pub const LAMBDA_CAP: f64 = 1e4;

/// Energy window of a piece of `𝒲₋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    Full,
    /// Weighted by `χ(λ)`.
    Low,
    /// Weighted by `1 − χ(λ)`.
    High,
}

/// Fourier data of the input.
pub(crate) trait Source: Sync {
    /// `[f̂(λ), f̂(−λ)]` in d = 1; `[f̂(λ), 0]` for radial input.
    fn transform(&self, lambda: f64) -> [Complex64; 2];
    /// Radius containing the support.
    fn reach(&self) -> f64;
    /// Frequency above which the transform is not trustworthy.
    fn band(&self) -> f64;
}

/// Transform of a sampled field by the Riemann sum.
pub(crate) struct FieldSource {
    d: u32,
    radial: bool,
    /// `(coordinate or radius, value × weight)` of the nonzero samples.
    terms: Vec<(f64, Complex64)>,
    reach: f64,
    band: f64,
}

impl FieldSource {
    pub fn new(f: &SampledField) -> Result<Self> {
        let d = f.dimension.get();
        let coords = f.grid.coordinates()?;
        let w = f.cell_measures();
        let radial = matches!(f.grid, Grid::Radial { .. });
        let area = sphere_area(d);
        let peak = f.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        let terms: Vec<(f64, Complex64)> = coords
            .iter()
            .zip(&f.values)
            .zip(&w)
            .filter(|((_, v), _)| v.norm() > 1e-300 && v.norm() > 1e-17 * peak)
            // radial weights carry |S^{d−1}|, which the kernel K_d already contains
            .map(|((&x, v), &w)| (x, v * if radial { w / area } else { w }))
            .collect();
        let reach = terms.iter().fold(0.0f64, |a, (x, _)| a.max(x.abs()));
        Ok(FieldSource { d, radial, terms, reach, band: PI / f.grid.spacing() })
    }
}

impl Source for FieldSource {
    fn transform(&self, lambda: f64) -> [Complex64; 2] {
        if self.radial {
            let s: Complex64 = self
                .terms
                .iter()
                .map(|&(r, v)| v * radial_fourier_kernel(self.d, lambda * r).expect("d ≤ 9"))
                .sum();
            [s, ZERO]
        } else {
            let mut p = ZERO;
            let mut m = ZERO;
            for &(y, v) in &self.terms {
                let e = Complex64::cis(-lambda * y);
                p += v * e;
                m += v * e.conj();
            }
            [p, m]
        }
    }

    fn reach(&self) -> f64 {
        self.reach
    }

    fn band(&self) -> f64 {
        self.band
    }
}

/// `1_{a<|y|<b}` on the line, with its exact transform.
pub(crate) struct ShellSource {
    pub inner: f64,
    pub outer: f64,
}

impl Source for ShellSource {
    fn transform(&self, lambda: f64) -> [Complex64; 2] {
        let v = if lambda.abs() < 1e-12 {
            2.0 * (self.outer - self.inner)
        } else {
            2.0 * ((lambda * self.outer).sin() - (lambda * self.inner).sin()) / lambda
        };
        [Complex64::new(v, 0.0); 2]
    }

    fn reach(&self) -> f64 {
        self.outer
    }

    fn band(&self) -> f64 {
        f64::INFINITY
    }
}

/// Couplings entering the assembly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Coupling {
    /// `Γ = (I + C Fᵀ)^{-1} C` of the model.
    Model,
    /// `Γ = I`: the bare operator `T_φ`.
    Unit,
}

/// `𝒲` pieces at the output points.
#[derive(Clone, Debug)]
pub(crate) struct Assembly {
    pub values: Vec<Vec<Complex64>>,
    pub errors: Vec<Vec<f64>>,
    pub lambda_max: f64,
    pub lambda_truncated: bool,
    pub nodes: usize,
}

fn spectral_pairing(d: u32, lambda: f64, fhat: [Complex64; 2], phat: [Complex64; 2]) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if d == 1 {
        i / (2.0 * lambda) * (fhat[0] * phat[0].conj() + fhat[1] * phat[1].conj())
    } else {
        // (iπ/λ)(2π)^{−d}|S^{d−1}|λ^{d−1} f̂(λ) conj φ̂(λ)
        let c = PI / lambda * (2.0 * PI).powi(-(d as i32)) * sphere_area(d) * lambda.powi(d as i32 - 1);
        i * c * fhat[0] * phat[0].conj()
    }
}

fn profile_hat(p: &PotentialProfile, lambda: f64) -> [Complex64; 2] {
    if p.dimension().get() == 1 {
        [p.fourier(lambda), p.fourier(-lambda)]
    } else {
        [p.fourier(lambda), ZERO]
    }
}

/// `v_k(λ) = ⟨(R₀^+ − R₀^−)f, φ_k⟩`.
fn pairings(profiles: &[&PotentialProfile], d: u32, lambda: f64, fhat: [Complex64; 2]) -> Vec<Complex64> {
    profiles.iter().map(|p| spectral_pairing(d, lambda, fhat, profile_hat(p, lambda))).collect()
}

/// Smallest `λ` beyond which every `|v_k|` stays below `tol` times its peak.
fn envelope_cutoff(
    profiles: &[&PotentialProfile],
    d: u32,
    src: &dyn Source,
    tol: f64,
) -> (f64, bool) {
    let scan: Vec<f64> = (0..=350).map(|k| 1e-3 * 10f64.powf(k as f64 / 50.0)).collect();
    let env: Vec<f64> = scan
        .par_iter()
        .map(|&l| {
            pairings(profiles, d, l, src.transform(l)).iter().fold(0.0f64, |a, v| a.max(v.norm())) * l
        })
        .collect();
    let peak = env.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return (scan[0], false);
    }
    match env.iter().rposition(|&e| e > tol * peak) {
        Some(k) if k + 1 < scan.len() => (scan[k + 1].min(src.band()), scan[k + 1] > src.band()),
        Some(_) => (LAMBDA_CAP.min(src.band()), true),
        None => (scan[0], false),
    }
}

/// Panel edges of the outer `λ` integral.
fn lambda_panels(end: f64, width: f64, graded: bool, breaks: &[f64]) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut start = 0.0;
    if graded {
        let first = width.min(end);
        let mut e: Vec<f64> = (1..=48).map(|k| first * 0.5f64.powi(k)).collect();
        e.reverse();
        edges.extend(e);
        edges.push(first);
        start = first;
    }
    let n = ((end - start) / width).ceil().max(0.0) as usize;
    for k in 1..=n {
        edges.push((start + k as f64 * width).min(end));
    }
    edges.extend(breaks.iter().copied().filter(|&b| b > 0.0 && b < end));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * end.max(1.0));
    edges
}

fn piece_weight(piece: Piece, chi: f64) -> f64 {
    match piece {
        Piece::Full => 1.0,
        Piece::Low => chi,
        Piece::High => 1.0 - chi,
    }
}

/// `(1/πi)∫₀^∞ λ Σ_jk Γ_jk(λ) u_j(λ, x) v_k(λ) w(λ) dλ` for each requested piece.
pub(crate) fn assemble(
    cfg: &WaveOpConfig,
    src: &dyn Source,
    xs: &[f64],
    pieces: &[Piece],
    coupling: Coupling,
) -> Result<Assembly> {
    let model = &cfg.model;
    let d = model.dimension().get();
    let nx = xs.len();
    let np = pieces.len();
    let empty = Assembly {
        values: vec![vec![ZERO; nx]; np],
        errors: vec![vec![0.0; nx]; np],
        lambda_max: 0.0,
        lambda_truncated: false,
        nodes: 0,
    };
    let profiles = model.profiles();
    let trivial = match coupling {
        Coupling::Model => model.is_trivial(),
        Coupling::Unit => profiles.is_empty(),
    };
    if trivial || nx == 0 || np == 0 {
        return Ok(empty);
    }
    let (envelope_end, truncated) = envelope_cutoff(&profiles, d, src, 1e-3 * cfg.quad.abs_tol);
    let low_only = pieces.iter().all(|&p| p == Piece::Low);
    let end = if low_only { envelope_end.min(cfg.chi.hi) } else { envelope_end };
    let profile_reach = profiles.iter().map(|p| p.center().abs() + p.support_radius()).fold(0.0, f64::max);
    let x_reach = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let omega = x_reach + src.reach() + 2.0 * profile_reach;
    let width = 0.25f64.min(2.0 / omega.max(1e-300));
    let edges = lambda_panels(end, width, d == 2, &[cfg.chi.lo, cfg.chi.hi]);

    let widths: Vec<f64> =
        profiles.iter().map(|p| panel_width(p, KernelSpec::Free(Sign::Plus, end.max(1e-300)))).collect();
    let plans: Vec<Vec<PointPlan>> = profiles
        .iter()
        .zip(&widths)
        .map(|(p, &h)| xs.iter().map(|&x| Image::plan(p, h, x)).collect())
        .collect();
    let n = profiles.len();
    let scale = Complex64::new(0.0, -1.0 / PI);

    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    // fixed chunks reduced in order keep the sums independent of the thread count
    let chunks: Vec<(Vec<Vec<Complex64>>, Vec<Vec<f64>>)> = panels
        .par_chunks(PANEL_CHUNK)
        .map(|chunk| -> Result<_> {
            let mut acc = (vec![vec![ZERO; nx]; np], vec![vec![0.0; nx]; np]);
            for &(a, b) in chunk {
                let mut k_sum = vec![vec![ZERO; nx]; np];
                let mut g_sum = vec![vec![ZERO; nx]; np];
                for (lambda, wk, wg) in kronrod_rule(a, b) {
                    let chi = cfg.chi.value(lambda);
                    let weights: Vec<f64> = pieces.iter().map(|&p| piece_weight(p, chi)).collect();
                    if weights.iter().all(|&w| w == 0.0) {
                        continue;
                    }
                    let v = pairings(&profiles, d, lambda, src.transform(lambda));
                    if v.iter().all(|z| z.norm() == 0.0) {
                        continue;
                    }
                    let gamma = match coupling {
                        Coupling::Model => gamma_matrix(model, Sign::Plus, lambda, &cfg.quad)?,
                        Coupling::Unit => CMatrix::identity(n, n),
                    };
                    let coef: Vec<Complex64> = (0..n)
                        .map(|j| (0..n).map(|k| gamma[(j, k)] * v[k]).sum::<Complex64>() * lambda * scale)
                        .collect();
                    let mut integrand = vec![ZERO; nx];
                    for j in 0..n {
                        if coef[j].norm() == 0.0 {
                            continue;
                        }
                        let image = Image::with_width(profiles[j], KernelSpec::Free(Sign::Plus, lambda), widths[j])?;
                        for (out, plan) in integrand.iter_mut().zip(&plans[j]) {
                            *out += coef[j] * image.eval_planned(plan);
                        }
                    }
                    for (p, &w) in weights.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        for ((ks, gs), val) in k_sum[p].iter_mut().zip(g_sum[p].iter_mut()).zip(&integrand) {
                            *ks += val * (wk * w);
                            *gs += val * (wg * w);
                        }
                    }
                }
                for p in 0..np {
                    for i in 0..nx {
                        acc.0[p][i] += k_sum[p][i];
                        acc.1[p][i] += (k_sum[p][i] - g_sum[p][i]).norm();
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = (vec![vec![ZERO; nx]; np], vec![vec![0.0; nx]; np]);
    for c in chunks {
        for p in 0..np {
            for i in 0..nx {
                acc.0[p][i] += c.0[p][i];
                acc.1[p][i] += c.1[p][i];
            }
        }
    }
    if acc.0.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Quadrature { value: f64::NAN, error: f64::NAN });
    }
    Ok(Assembly { values: acc.0, errors: acc.1, lambda_max: end, lambda_truncated: truncated, nodes: 15 * panels.len() })
}

/// `∫_a^b e^{iλ|y−z|} dy = F(b − z) − F(a − z)`, `F(s) = sgn(s)(e^{iλ|s|} − 1)/(iλ)`.
fn abs_phase_antiderivative(lambda: f64, s: f64) -> Complex64 {
    let t = lambda * s.abs();
    // e^{it} − 1 without cancellation
    let num = Complex64::new(-2.0 * (0.5 * t).sin().powi(2), t.sin());
    s.signum() * num / Complex64::new(0.0, lambda)
}

/// `p_j(λ) = ∫_{a<|y|<b} (R₀^+(λ²)φ_j)(y) dy` in d = 1.
fn shell_image_pairing(p: &PotentialProfile, lambda: f64, inner: f64, outer: f64) -> Complex64 {
    let grid = crate::spectral::image::profile_grid(p, panel_width(p, KernelSpec::Free(Sign::Plus, lambda)));
    let f = |s: f64| abs_phase_antiderivative(lambda, s);
    let s: Complex64 = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&z, &w)| {
            let shell = f(outer - z) - f(inner - z) + f(-inner - z) - f(-outer - z);
            shell * (w * p.eval(z))
        })
        .sum();
    s * Complex64::new(0.0, 0.5 / lambda)
}

/// `(𝒲^l)^* 1_{a<|y|<b}` at the points `xs` (d = 1):
/// `conj[(1/πi)∫ χ λ Σ_jk Γ_jk ((R₀^+ − R₀^−)φ_k)(x) p_j(λ) dλ]`.
pub(crate) fn assemble_adjoint_shell(cfg: &WaveOpConfig, inner: f64, outer: f64, xs: &[f64]) -> Result<Vec<Complex64>> {
    let model = &cfg.model;
    let nx = xs.len();
    let profiles = model.profiles();
    if model.is_trivial() || nx == 0 || outer <= inner {
        return Ok(vec![ZERO; nx]);
    }
    let end = cfg.chi.hi;
    let profile_reach = profiles.iter().map(|p| p.center().abs() + p.support_radius()).fold(0.0, f64::max);
    let x_reach = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let omega = x_reach + outer + 2.0 * profile_reach;
    let width = 0.25f64.min(2.0 / omega);
    let edges = lambda_panels(end, width, false, &[cfg.chi.lo]);
    let n = profiles.len();
    let scale = Complex64::new(0.0, -1.0 / PI);
    let panels: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();
    let chunks: Vec<Vec<Complex64>> = panels
        .par_chunks(PANEL_CHUNK)
        .map(|chunk| -> Result<Vec<Complex64>> {
            let mut acc = vec![ZERO; nx];
            for &(a, b) in chunk {
                for (lambda, wk, _) in kronrod_rule(a, b) {
                    let chi = cfg.chi.value(lambda);
                    if chi == 0.0 {
                        continue;
                    }
                    let gamma = gamma_matrix(model, Sign::Plus, lambda, &cfg.quad)?;
                    let pj: Vec<Complex64> =
                        profiles.iter().map(|p| shell_image_pairing(p, lambda, inner, outer)).collect();
                    for k in 0..n {
                        let c: Complex64 = (0..n).map(|j| gamma[(j, k)] * pj[j]).sum::<Complex64>() * (lambda * chi * wk);
                        if c.norm() == 0.0 {
                            continue;
                        }
                        let image = Image::new(profiles[k], KernelSpec::SpectralMeasure(lambda))?;
                        for (out, &x) in acc.iter_mut().zip(xs) {
                            *out += c * image.eval(profiles[k], x);
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = vec![ZERO; nx];
    for c in chunks {
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
    }
    Ok(acc.into_iter().map(|v| (v * scale).conj()).collect())
}
