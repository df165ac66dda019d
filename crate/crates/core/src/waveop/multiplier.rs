//! Radial Fourier multipliers `m(|ξ|)` and the kernel decay of the model
//! symbol `(e + |log|ξ||)^{−a} χ(|ξ|)`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::field::{Grid, SampledField};
use crate::error::{Error, Result};
use crate::quadrature::gauss::GaussLegendre;
use crate::resolvent::{smooth_cutoff, CutoffSpec, Dimension};
use crate::specfun::{j0, j1};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `m(|D|)f` with an aliasing diagnostic.
#[derive(Clone, Debug)]
pub struct MultiplierOutput {
    pub field: SampledField,
    /// Set when `|m|` at the grid's Nyquist frequency exceeds `1e−8` of its maximum.
    pub aliasing: bool,
    /// Largest frequency the grid resolves.
    pub nyquist: f64,
}

fn fft_frequencies(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n).map(|k| if k <= n / 2 { k as f64 * dk } else { (k as f64 - n as f64) * dk }).collect()
}

fn aliasing_flag(peak: f64, at_nyquist: f64) -> bool {
    at_nyquist > 1e-8 * peak
}

/// Applies the radial symbol `m` to `f`: FFT on line and planar grids, a
/// Hankel pair truncated at `band` (or the Nyquist frequency) on radial grids.
pub fn multiplier_apply<S>(symbol: S, f: &SampledField, band: Option<f64>) -> Result<MultiplierOutput>
where
    S: Fn(f64) -> Result<Complex64> + Sync,
{
    let h = f.grid.spacing();
    let nyquist = PI / h;
    match f.grid {
        Grid::Line { len, .. } => {
            let ks = fft_frequencies(len, h);
            let m = ks.iter().map(|k| symbol(k.abs())).collect::<Result<Vec<_>>>()?;
            let mut buf = f.values.clone();
            let mut planner = FftPlanner::new();
            planner.plan_fft_forward(len).process(&mut buf);
            for (b, s) in buf.iter_mut().zip(&m) {
                *b *= s / len as f64;
            }
            planner.plan_fft_inverse(len).process(&mut buf);
            let peak = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
            Ok(MultiplierOutput { field: f.with_values(buf)?, aliasing: aliasing_flag(peak, symbol(nyquist)?.norm()), nyquist })
        }
        Grid::Plane { n, .. } => {
            let ks = fft_frequencies(n, h);
            let mut buf = f.values.clone();
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            transform_2d(&mut buf, n, &*fwd);
            let mut peak = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let s = symbol(ks[i].hypot(ks[j]))?;
                    peak = peak.max(s.norm());
                    buf[i * n + j] *= s / (n * n) as f64;
                }
            }
            transform_2d(&mut buf, n, &*inv);
            Ok(MultiplierOutput { field: f.with_values(buf)?, aliasing: aliasing_flag(peak, symbol(nyquist)?.norm()), nyquist })
        }
        Grid::Radial { len, .. } => {
            if f.dimension.get() != 2 {
                return Err(Error::Unsupported("radial multipliers are implemented for d = 2".into()));
            }
            let top = band.unwrap_or(nyquist).min(nyquist);
            let (out, peak) = hankel_multiplier(&symbol, &f.values, h, len, top)?;
            let edge = symbol(nyquist)?.norm();
            let aliasing = band.is_none_or(|b| b > nyquist) && aliasing_flag(peak, edge);
            Ok(MultiplierOutput { field: f.with_values(out)?, aliasing, nyquist })
        }
    }
}

fn transform_2d(buf: &mut [Complex64], n: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![ZERO; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = buf[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            buf[i * n + j] = col[i];
        }
    }
}

/// `f̂(k) = 2π∫ f J₀(kr) r dr`, `m(k)f̂(k)`, `(1/2π)∫ m f̂ J₀(kr) k dk` on `[0, top]`.
fn hankel_multiplier<S>(symbol: &S, values: &[Complex64], h: f64, len: usize, top: f64) -> Result<(Vec<Complex64>, f64)>
where
    S: Fn(f64) -> Result<Complex64> + Sync,
{
    let reach = len as f64 * h;
    let width = PI / (2.0 * reach);
    let panels = (top / width).ceil().max(1.0) as usize;
    let rule = GaussLegendre::cached(16);
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let a = p as f64 * top / panels as f64;
            rule.mapped(a, a + top / panels as f64).collect::<Vec<_>>()
        })
        .collect();
    let rs: Vec<f64> = (0..len).map(|k| (k as f64 + 0.5) * h).collect();
    let weighted: Vec<Complex64> = values.iter().zip(&rs).map(|(v, r)| v * (2.0 * PI * r * h)).collect();
    // midpoint endpoint terms −(h²/24)F'(0) + (7h⁴/5760)F'''(0) for F = r f J₀(kr),
    // with f ≈ a + b r² through the first two samples
    let (a0, b0) = if len > 1 {
        ((9.0 * values[0] - values[1]) / 8.0, (values[1] - values[0]) / (2.0 * h * h))
    } else {
        (values[0], ZERO)
    };
    let endpoint = |k: f64| {
        let g2 = 2.0 * b0 - a0 * (0.5 * k * k);
        (a0 * (-h * h / 24.0) + g2 * (3.0 * 7.0 * h.powi(4) / 5760.0)) * (2.0 * PI)
    };
    let m = nodes.par_iter().map(|&(k, _)| symbol(k)).collect::<Result<Vec<_>>>()?;
    let peak = m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let spectrum: Vec<Complex64> = nodes
        .par_iter()
        .zip(&m)
        .map(|(&(k, w), s)| {
            let fhat: Complex64 = weighted.iter().zip(&rs).map(|(v, r)| v * j0(k * r)).sum::<Complex64>() + endpoint(k);
            s * fhat * (w * k / (2.0 * PI))
        })
        .collect();
    let out = rs
        .par_iter()
        .map(|&r| nodes.iter().zip(&spectrum).map(|(&(k, _), s)| s * j0(k * r)).sum())
        .collect();
    Ok((out, peak))
}

/// `ψ(k) = (e + |log k|)^{−a} χ(k)`.
pub fn model_symbol(a: f64, chi: &CutoffSpec, k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    (E + k.ln().abs()).powf(-a) * chi.value(k)
}

fn model_symbol_derivative(a: f64, chi: &CutoffSpec, k: f64) -> Result<f64> {
    let l = k.ln();
    let base = E + l.abs();
    let dbase = -a * base.powf(-a - 1.0) * l.signum() / k;
    Ok(dbase * chi.value(k) + base.powf(-a) * smooth_cutoff(chi, k, 1)?)
}

/// Normalized decay `|ψ^∨(x)|·|x|^d·|log|x||^{a+1−1/d}` on a log grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub a: f64,
    pub d: u32,
    pub xs: Vec<f64>,
    pub kernel: Vec<f64>,
    pub normalized: Vec<f64>,
    pub max_over_median: f64,
    /// `max_over_median < 10`.
    pub bounded: bool,
}

/// `ψ^∨(x)` by one integration by parts:
/// d = 1: `−(1/πx)∫ψ'(k) sin(kx) dk`; d = 2: `−(1/2πx)∫ψ'(k) k J₁(kx) dk`.
fn inverse_transform(a: f64, d: u32, chi: &CutoffSpec, x: f64) -> Result<f64> {
    let rule = GaussLegendre::cached(16);
    let width = (PI / x).min((chi.hi - chi.lo) / 16.0);
    let mut edges: Vec<f64> = (1..=60).rev().map(|k| width * 0.5f64.powi(k)).collect();
    let mut e = width;
    while e < chi.hi {
        edges.push(e);
        e += width;
    }
    edges.push(chi.hi);
    edges.extend([chi.lo, 1.0].into_iter().filter(|&b| b < chi.hi));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut s = 0.0;
    let mut lo = 0.0;
    for &hi in &edges {
        for (k, w) in rule.mapped(lo, hi) {
            let dp = model_symbol_derivative(a, chi, k)?;
            s += w * dp * if d == 1 { (k * x).sin() } else { k * j1(k * x) };
        }
        lo = hi;
    }
    Ok(if d == 1 { -s / (PI * x) } else { -s / (2.0 * PI * x) })
}

pub fn multiplier_kernel_decay(a: f64, d: Dimension, chi: &CutoffSpec) -> Result<DecayReport> {
    let dd = d.get();
    if dd > 2 {
        return Err(Error::Unsupported("kernel decay is probed for d = 1, 2".into()));
    }
    if !(a > 1.0 / dd as f64) {
        return Err(Error::Precondition(format!("the symbol needs a > 1/d = {}, got a = {a}", 1.0 / dd as f64)));
    }
    let xs: Vec<f64> = (0..=40).map(|k| 1e2 * 10f64.powf(k as f64 / 20.0)).collect();
    let kernel = xs.par_iter().map(|&x| inverse_transform(a, dd, chi, x)).collect::<Result<Vec<_>>>()?;
    let expo = a + 1.0 - 1.0 / dd as f64;
    let normalized: Vec<f64> =
        xs.iter().zip(&kernel).map(|(x, v)| v.abs() * x.powi(dd as i32) * x.ln().powf(expo)).collect();
    let mut sorted = normalized.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = sorted[sorted.len() - 1];
    let max_over_median = if median > 0.0 { max / median } else { f64::INFINITY };
    Ok(DecayReport { a, d: dd, xs, kernel, normalized, max_over_median, bounded: max_over_median < 10.0 })
}
