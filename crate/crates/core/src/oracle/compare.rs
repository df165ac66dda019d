//! Stationary `W₋f` against the time-domain limit on a shared grid.

use num_complex::Complex64;

use super::{ak_identity_check, discretize, wave_operator_time_limit, wrap_horizon, Averaging, GridSpec};
use crate::error::{Error, Result};
use crate::waveop::{apply_w_minus, Grid, SampledField, WaveOpConfig};

/// Cross-validation of the two `W₋` pipelines.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    /// Averaging time of the oracle, half the wrap-around limit.
    pub t: f64,
    pub t_limit: f64,
    /// `‖W₋f (stationary) − W₋f (time)‖₂/‖W₋f (time)‖₂`.
    pub rel_l2_error: f64,
    /// Same with the time limit taken at `T/2`.
    pub rel_l2_error_half: f64,
    /// `‖W_T f − W_{T/2} f‖₂/‖W_T f‖₂`.
    pub doubling_change: f64,
    /// `|‖W₋f‖₂/‖f‖₂ − 1|` of the stationary output.
    pub isometry_drift: f64,
    /// Aronszajn–Krein residual of the discrete model at `z = 1 + i`.
    pub ak_residual: f64,
    pub lambda_max: f64,
    pub flagged_points: usize,
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Runs both pipelines on `f` sampled at the periodic grid points.
pub fn compare_stationary_vs_time<F>(cfg: &WaveOpConfig, grid: GridSpec, f: F) -> Result<CompareReport>
where
    F: Fn(&[f64]) -> Complex64,
{
    if grid.d.get() != 1 || cfg.model.dimension() != grid.d {
        return Err(Error::Unsupported("the stationary/time comparison runs on d = 1 line grids".into()));
    }
    let dm = discretize(&cfg.model, grid)?;
    let fv = dm.sample(&f);
    let t_limit = wrap_horizon(&dm, &fv);
    let t = if t_limit.is_finite() { 0.5 * t_limit } else { 1.0 };
    let late = wave_operator_time_limit(&dm, &fv, t, Averaging::Window)?;
    let early = wave_operator_time_limit(&dm, &fv, 0.5 * t, Averaging::Window)?;
    let oracle = dm.unscale(&late.values);
    let oracle_half = dm.unscale(&early.values);

    let field = SampledField::from_fn(grid.d, Grid::line(-grid.half_length, grid.spacing(), grid.points_per_axis), &f)?;
    let out = apply_w_minus(cfg, &field)?;
    let iso = out.field.lp_norm(2.0)? / field.lp_norm(2.0)?;
    let ak_residual = if dm.rank() > 0 {
        ak_identity_check(&dm, Complex64::new(1.0, 1.0))?.residual
    } else {
        0.0
    };
    Ok(CompareReport {
        t,
        t_limit,
        rel_l2_error: rel_l2(&out.field.values, &oracle),
        rel_l2_error_half: rel_l2(&out.field.values, &oracle_half),
        doubling_change: rel_l2(&oracle_half, &oracle),
        isometry_drift: (iso - 1.0).abs(),
        ak_residual,
        lambda_max: out.lambda_max,
        flagged_points: out.flagged.len(),
    })
}
