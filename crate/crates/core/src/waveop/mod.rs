//! Stationary assembly of `W₋ = I − 𝒲₋` for rank-one and finite-rank
//! perturbations, its low/high-energy split, the explicit truncated Hilbert
//! piece of the d = 1 kernel, the d = 2 factorization `T_φ ∘ G(√−Δ)χ(√−Δ)`,
//! and Lᵖ / weak-L¹ probes.

mod assembly;
mod field;
mod multiplier;
mod tphi;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::quadrature::gauss::adaptive_complex;
use crate::quadrature::QuadConfig;
use crate::resolvent::{CutoffSpec, Dimension};
use crate::spectral::{gamma_matrix, PerturbationModel, MASS_EPS};
use crate::Sign;
use assembly::{assemble, assemble_adjoint_shell, Coupling, FieldSource, ShellSource};

pub use assembly::{Piece, LAMBDA_CAP};
pub use field::{lp_norms, Grid, NormReport, Norms, SampledField};
pub use multiplier::{multiplier_apply, multiplier_kernel_decay, model_symbol, DecayReport, MultiplierOutput};
pub use tphi::{centered_parts, tphi_apply, tphi_dilation_family, tphi_stationary};

/// Model, cutoff and quadrature controls of the stationary assembly.
#[derive(Clone, Debug)]
pub struct WaveOpConfig {
    pub model: PerturbationModel,
    /// Scale of the low-energy cutoff `χ`.
    pub lambda0: f64,
    /// `χ = 1` on `[0, λ₀/2]`, `0` above `λ₀`.
    pub chi: CutoffSpec,
    pub quad: QuadConfig,
    /// Output points; `None` means the input grid.
    pub x_grid: Option<Grid>,
}

impl WaveOpConfig {
    pub fn new(model: PerturbationModel, lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::Invalid(format!("λ₀ must be positive, got {lambda0}")));
        }
        Ok(WaveOpConfig { model, lambda0, chi: CutoffSpec::chi(lambda0)?, quad: QuadConfig::default(), x_grid: None })
    }

    pub fn with_x_grid(mut self, grid: Grid) -> Self {
        self.x_grid = Some(grid);
        self
    }

    fn validate(&self) -> Result<()> {
        let c = &self.chi;
        if (c.lo - 0.5 * self.lambda0).abs() > 1e-12 * self.lambda0 || (c.hi - self.lambda0).abs() > 1e-12 * self.lambda0 {
            return Err(Error::Invalid(format!("χ must switch on [λ₀/2, λ₀], got [{}, {}]", c.lo, c.hi)));
        }
        self.quad.validate()
    }

    fn output_grid(&self, f: &SampledField) -> Result<Grid> {
        let g = self.x_grid.unwrap_or(f.grid);
        match (g, f.grid) {
            (Grid::Line { .. }, Grid::Line { .. }) | (Grid::Radial { .. }, Grid::Radial { .. }) => Ok(g),
            _ => Err(Error::Unsupported("stationary assembly needs line (d = 1) or radial grids".into())),
        }
    }

    fn check_input(&self, f: &SampledField) -> Result<()> {
        self.validate()?;
        if f.dimension != self.model.dimension() {
            return Err(Error::Invalid("field and model dimensions differ".into()));
        }
        Ok(())
    }
}

/// `W₋f` with per-point quadrature diagnostics.
#[derive(Clone, Debug)]
pub struct WaveOutput {
    pub field: SampledField,
    /// Gauss–Kronrod error estimate of `𝒲₋f` per point.
    pub error: Vec<f64>,
    /// Points whose error estimate exceeds the tolerance.
    pub flagged: Vec<usize>,
    pub lambda_max: f64,
    /// Set when the `λ` envelope had not decayed by the cap or the input's band limit.
    pub lambda_truncated: bool,
    pub lambda_nodes: usize,
}

fn flag_points(values: &[Complex64], error: &[f64], scale: f64, quad: &QuadConfig) -> Vec<usize> {
    values
        .iter()
        .zip(error)
        .enumerate()
        .filter(|(_, (v, e))| **e > quad.abs_tol * scale + quad.rel_tol * v.norm())
        .map(|(i, _)| i)
        .collect()
}

fn sup(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// `W₋f = f − (1/πi)∫₀^∞ λ Σ_jk Γ_jk(λ) (R₀^+(λ²)φ_j) ⟨(R₀^+ − R₀^−)f, φ_k⟩ dλ`.
///
/// The spectral condition is checked at every `λ` node through `Γ`.
pub fn apply_w_minus(cfg: &WaveOpConfig, f: &SampledField) -> Result<WaveOutput> {
    cfg.check_input(f)?;
    let grid = cfg.output_grid(f)?;
    if grid != f.grid {
        return Err(Error::Invalid("W₋f needs the output grid to coincide with the input grid".into()));
    }
    let xs = grid.coordinates()?;
    let src = FieldSource::new(f)?;
    let a = assemble(cfg, &src, &xs, &[Piece::Full], Coupling::Model)?;
    let values: Vec<Complex64> = f.values.iter().zip(&a.values[0]).map(|(fv, w)| fv - w).collect();
    let flagged = flag_points(&a.values[0], &a.errors[0], sup(&f.values), &cfg.quad);
    Ok(WaveOutput {
        field: f.with_values(values)?,
        error: a.errors[0].clone(),
        flagged,
        lambda_max: a.lambda_max,
        lambda_truncated: a.lambda_truncated,
        lambda_nodes: a.nodes,
    })
}

/// `𝒲₋^l f` and `𝒲₋^h f` on the output grid, from one pass over the same nodes.
#[derive(Clone, Debug)]
pub struct SplitOutput {
    pub low: SampledField,
    pub high: SampledField,
    pub low_error: Vec<f64>,
    pub high_error: Vec<f64>,
    pub lambda_max: f64,
}

pub fn low_high_split(cfg: &WaveOpConfig, f: &SampledField) -> Result<SplitOutput> {
    cfg.check_input(f)?;
    let grid = cfg.output_grid(f)?;
    let xs = grid.coordinates()?;
    let src = FieldSource::new(f)?;
    let a = assemble(cfg, &src, &xs, &[Piece::Low, Piece::High], Coupling::Model)?;
    let mut values = a.values.into_iter();
    let mut errors = a.errors.into_iter();
    let low = SampledField::new(f.dimension, grid, values.next().expect("low"))?;
    let high = SampledField::new(f.dimension, grid, values.next().expect("high"))?;
    Ok(SplitOutput {
        low,
        high,
        low_error: errors.next().expect("low"),
        high_error: errors.next().expect("high"),
        lambda_max: a.lambda_max,
    })
}

/// One energy piece of `𝒲₋f` at arbitrary output points.
pub fn scattered_piece(cfg: &WaveOpConfig, f: &SampledField, piece: Piece) -> Result<SampledField> {
    cfg.check_input(f)?;
    let grid = cfg.output_grid(f)?;
    let src = FieldSource::new(f)?;
    let a = assemble(cfg, &src, &grid.coordinates()?, &[piece], Coupling::Model)?;
    SampledField::new(f.dimension, grid, a.values.into_iter().next().expect("piece"))
}

/// `𝒲₋^l f = T_φ((Γχ)(√−Δ) f)` for a rank-one model in d = 2 and radial `f`.
pub fn low_energy_factorized(cfg: &WaveOpConfig, f: &SampledField) -> Result<SampledField> {
    cfg.check_input(f)?;
    let profiles = cfg.model.profiles();
    if cfg.model.dimension().get() != 2 || profiles.len() != 1 {
        return Err(Error::Unsupported("the factorized route is the rank-one d = 2 path".into()));
    }
    if cfg.model.is_trivial() {
        return f.with_values(vec![Complex64::new(0.0, 0.0); f.len()]);
    }
    let symbol = |k: f64| -> Result<Complex64> {
        let chi = cfg.chi.value(k);
        if chi == 0.0 || k <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(gamma_matrix(&cfg.model, Sign::Plus, k, &cfg.quad)?[(0, 0)] * chi)
    };
    let m = multiplier_apply(symbol, f, Some(cfg.chi.hi))?;
    tphi_apply(profiles[0], &m.field)
}

/// Truncated Hilbert kernel `(1/2πi)(1/(|x|+|y|) − 1/(|x|−|y|))·1_{||x|−|y||>1}`.
pub fn hilbert_piece(x: f64, y: f64) -> Complex64 {
    let (a, b) = (x.abs(), y.abs());
    if (a - b).abs() <= 1.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -1.0 / (2.0 * PI)) * (1.0 / (a + b) - 1.0 / (a - b))
}

/// `∫ hilbert_piece(x, y) 1_{a<|y|<b} dy` by adaptive quadrature.
pub fn hilbert_on_shell(x: f64, inner: f64, outer: f64) -> Result<Complex64> {
    if outer <= inner {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let ax = x.abs();
    let breaks = [ax - 1.0, ax + 1.0];
    let mut total = Complex64::new(0.0, 0.0);
    for side in [1.0, -1.0] {
        let e = adaptive_complex(|t| hilbert_piece(x, side * t), inner, outer, &breaks, 1e-13, 1e-12, 4000);
        if e.error > 1e-9 * e.value.norm().max(1e-3) {
            return Err(Error::Quadrature { value: e.value.norm(), error: e.error });
        }
        total += e.value;
    }
    Ok(total)
}

/// One row of the `R` sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyRow {
    pub r: f64,
    /// `|H f_R(0)|` for the truncated Hilbert piece `H`.
    pub hilbert_at_zero: f64,
    /// `sup_{|x|<1} |H f_R(x)|`.
    pub hilbert_sup: f64,
    /// `sup_{|x|<1} |𝒲₋^l f_R(x)|`, when requested.
    pub low_sup: Option<f64>,
    /// `sup_{|x|<1} |(𝒲₋^l)^* f_R(x)|`, when requested.
    pub adjoint_low_sup: Option<f64>,
    /// `‖H f_R‖₁/‖f_R‖₁` and `‖H f_R‖_{1,∞}/‖f_R‖₁` on `|x| ≤ 4R`.
    pub norms: NormReport,
    /// Slope of `hilbert_sup` (or `low_sup` without a Hilbert piece) against `ln R` over the rows so far.
    pub log_slope_running: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyReport {
    pub rows: Vec<DichotomyRow>,
    /// False for mean-zero models, where the Hilbert piece is absent.
    pub hilbert_present: bool,
    pub hilbert_slope: f64,
    pub low_slope: Option<f64>,
    pub adjoint_low_slope: Option<f64>,
}

/// Output points in `|x| < 1` used for the sup norms.
pub fn inner_points() -> Vec<f64> {
    (0..21).map(|k| -0.95 + 0.095 * k as f64).collect()
}

/// Applies the Hilbert piece (and optionally `𝒲₋^l` and its adjoint) to `f_R = 1_{2<|y|<R}`.
pub fn dichotomy_d1(cfg: &WaveOpConfig, r_values: &[f64], with_low: bool) -> Result<DichotomyReport> {
    cfg.validate()?;
    if cfg.model.dimension().get() != 1 {
        return Err(Error::Precondition("the dichotomy sweep is one-dimensional".into()));
    }
    if r_values.iter().any(|&r| !(r >= 2.0 && r.is_finite())) {
        return Err(Error::Invalid("R values must be at least 2".into()));
    }
    let present = cfg.model.masses().iter().any(|m| m.abs() > MASS_EPS) && !cfg.model.is_trivial();
    let xs = inner_points();
    let mut rows: Vec<DichotomyRow> = Vec::new();
    for &r in r_values {
        let (h0, hsup, norms) = if present {
            let vals = xs.par_iter().map(|&x| hilbert_on_shell(x, 2.0, r)).collect::<Result<Vec<_>>>()?;
            let at_zero = hilbert_on_shell(0.0, 2.0, r)?.norm();
            (at_zero, sup(&vals), shell_norms(r)?)
        } else {
            let zero = NormReport { p: 1.0, ratio: 0.0, weak_l1: 0.0, family_parameter: r };
            (0.0, 0.0, zero)
        };
        let (low_sup, adjoint_low_sup) = if with_low {
            let src = ShellSource { inner: 2.0, outer: r };
            let a = assemble(cfg, &src, &xs, &[Piece::Low], Coupling::Model)?;
            let adj = assemble_adjoint_shell(cfg, 2.0, r, &xs)?;
            (Some(sup(&a.values[0])), Some(sup(&adj)))
        } else {
            (None, None)
        };
        rows.push(DichotomyRow {
            r,
            hilbert_at_zero: h0,
            hilbert_sup: hsup,
            low_sup,
            adjoint_low_sup,
            norms,
            log_slope_running: f64::NAN,
        });
        let lr: Vec<f64> = rows.iter().map(|w| w.r.ln()).collect();
        let ys: Vec<f64> =
            rows.iter().map(|w| if present { w.hilbert_sup } else { w.low_sup.unwrap_or(0.0) }).collect();
        let slope = if rows.len() >= 2 { linear_fit(&lr, &ys).slope } else { f64::NAN };
        rows.last_mut().expect("row").log_slope_running = slope;
    }
    let lr: Vec<f64> = rows.iter().map(|w| w.r.ln()).collect();
    let slope_of = |ys: Vec<f64>| if rows.len() >= 2 { linear_fit(&lr, &ys).slope } else { f64::NAN };
    let hilbert_slope = slope_of(rows.iter().map(|w| w.hilbert_sup).collect());
    let low_slope = with_low.then(|| slope_of(rows.iter().map(|w| w.low_sup.unwrap_or(0.0)).collect()));
    let adjoint_low_slope = with_low.then(|| slope_of(rows.iter().map(|w| w.adjoint_low_sup.unwrap_or(0.0)).collect()));
    Ok(DichotomyReport { rows, hilbert_present: present, hilbert_slope, low_slope, adjoint_low_slope })
}

/// One member `f(x) = e^{−(x−c)²/2s²}/(s√(2π))` of an L¹-normalized bump family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub shift: f64,
    pub scale: f64,
}

/// `‖W₋f‖₁/‖f‖₁` and `‖W₋f‖_{1,∞}/‖f‖₁` for each bump, on `[−X, X]` with
/// `X = |c| + 12s + 20` and spacing `min(1/4, s/10)`; `family_parameter` is `s`.
pub fn l1_family_d1(cfg: &WaveOpConfig, members: &[Bump]) -> Result<Vec<NormReport>> {
    if cfg.model.dimension().get() != 1 {
        return Err(Error::Precondition("the bump family lives on the line".into()));
    }
    let d1 = Dimension::new(1)?;
    let mut local = cfg.clone();
    local.x_grid = None;
    members
        .iter()
        .map(|b| {
            if !(b.scale > 0.0 && b.scale.is_finite() && b.shift.is_finite()) {
                return Err(Error::Invalid(format!("bad bump {b:?}")));
            }
            let half = b.shift.abs() + 12.0 * b.scale + 20.0;
            let h = 0.25f64.min(b.scale / 10.0);
            let n = ((2.0 * half / h).ceil() as usize + 1) | 1;
            let norm = 1.0 / (b.scale * (2.0 * PI).sqrt());
            let f = SampledField::from_fn(d1, Grid::symmetric(half, n), |x| {
                Complex64::new(norm * (-0.5 * ((x[0] - b.shift) / b.scale).powi(2)).exp(), 0.0)
            })?;
            let w = apply_w_minus(&local, &f)?;
            NormReport::measure(&w.field, &f, 1.0, b.scale)
        })
        .collect()
}

/// L¹ and weak-L¹ ratios of the Hilbert piece on `f_R`, sampled on `|x| ≤ 4R`.
fn shell_norms(r: f64) -> Result<NormReport> {
    let d1 = Dimension::new(1)?;
    let half = 4.0 * r;
    let n = ((2.0 * half / 0.25).ceil() as usize).clamp(2001, 64001) | 1;
    let grid = Grid::symmetric(half, n);
    let xs = grid.coordinates()?;
    let out = xs.par_iter().map(|&x| hilbert_on_shell(x, 2.0, r)).collect::<Result<Vec<_>>>()?;
    let out = SampledField::new(d1, grid, out)?;
    let input = SampledField::from_fn(d1, grid, |x| {
        let a = x[0].abs();
        Complex64::new(if a > 2.0 && a < r { 1.0 } else { 0.0 }, 0.0)
    })?;
    let mut rep = NormReport::measure(&out, &input, 1.0, r)?;
    // the exact L¹ mass of f_R replaces the staircase sum
    let l1 = 2.0 * (r - 2.0);
    if l1 > 0.0 {
        let raw = input.lp_norm(1.0)?;
        rep.ratio *= raw / l1;
        rep.weak_l1 *= raw / l1;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests;
