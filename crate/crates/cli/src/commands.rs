//! One function per subcommand; each writes its artifacts into the run directory.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankwave::oracle::{ak_identity_check, compare_stationary_vs_time, discretize, GridSpec};
use rankwave::resolvent::{kernel_part, KernelPart};
use rankwave::spectral::{
    f_entry, g11_leading, low_energy_fit, scalar_channel, select_lambda0, spectral_condition_scan, Law,
    PerturbationModel,
};
use rankwave::waveop::{
    apply_w_minus, dichotomy_d1, low_high_split, Grid, NormReport, SampledField, WaveOpConfig,
};
use rankwave::{Complex64, Sign};
use serde_json::json;

use crate::artifacts::{json_bytes, sha256_hex, Run};
use crate::config::{FieldSpec, PieceSpec, RunConfig};
use crate::Failure;

fn sign(s: &str) -> Result<Sign, Failure> {
    Sign::parse(s).ok_or_else(|| Failure::Usage(format!("sign must be + or -, got {s:?}")))
}

fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, Failure> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(Failure::Usage(format!("need 0 < lo < hi and at least 2 points, got [{lo}, {hi}], n = {n}")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect())
}

fn model_hash(cfg: &RunConfig) -> Result<String, Failure> {
    Ok(sha256_hex(&json_bytes(&cfg.model)?))
}

/// Closure sampling `spec` at a point, drawing random packets from `seed`.
fn field_fn(spec: &FieldSpec, d: u32, half: f64, seed: u64) -> Result<Box<dyn Fn(&[f64]) -> Complex64>, Failure> {
    match *spec {
        FieldSpec::Packet { k0, width, center } => {
            if !(width > 0.0) {
                return Err(Failure::Usage(format!("packet width must be positive, got {width}")));
            }
            if d > 1 && (k0 != 0.0 || center != 0.0) {
                return Err(Failure::Usage("radial input takes k0 = 0 and center = 0".into()));
            }
            Ok(Box::new(move |x: &[f64]| {
                let s = x[0] - center;
                Complex64::cis(k0 * s) * (-0.5 * (s / width).powi(2)).exp()
            }))
        }
        FieldSpec::Random { count } => {
            if d != 1 {
                return Err(Failure::Usage("random fields are one-dimensional".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let packets: Vec<(f64, f64, f64, Complex64)> = (0..count)
                .map(|_| {
                    let c = rng.gen_range(-0.25 * half..0.25 * half);
                    let k = rng.gen_range(-3.0..3.0);
                    let w = rng.gen_range(1.0..3.0);
                    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    (c, k, w, a)
                })
                .collect();
            Ok(Box::new(move |x: &[f64]| {
                packets
                    .iter()
                    .map(|&(c, k, w, a)| {
                        let s = x[0] - c;
                        a * Complex64::cis(k * s) * (-0.5 * (s / w).powi(2)).exp()
                    })
                    .sum()
            }))
        }
    }
}

pub fn resolvent(cfg: &RunConfig, run: &mut Run) -> Result<(), Failure> {
    let spec = &cfg.resolvent;
    let d = cfg.model.dimension()?;
    let s = sign(&spec.sign)?;
    let part = KernelPart::parse(&spec.part)
        .ok_or_else(|| Failure::Usage(format!("unknown kernel part {:?}", spec.part)))?;
    if !(spec.r_min >= 0.0 && spec.r_max > spec.r_min && spec.points >= 2) {
        return Err(Failure::Usage("need 0 ≤ r_min < r_max and at least 2 points".into()));
    }
    let mut rows = Vec::with_capacity(spec.points);
    for k in 0..spec.points {
        let r = spec.r_min + (spec.r_max - spec.r_min) * k as f64 / (spec.points - 1) as f64;
        let v = kernel_part(part, d, s, spec.lambda, r)?;
        let w = kernel_part(part, d, s.flip(), spec.lambda, r)?;
        rows.push(vec![r, v.re, v.im, (w - v.conj()).norm()]);
    }
    run.csv("kernel.csv", &["r", "re", "im", "conj_defect"], &rows)
}

pub fn spectral_scan(cfg: &RunConfig, base: &Path, run: &mut Run) -> Result<(), Failure> {
    let model = cfg.model.build(base)?;
    let quad = cfg.quad.build()?;
    let spec = &cfg.scan;
    let lambdas = logspace(spec.lambda_min, spec.lambda_max, spec.points)?;
    let curve = spectral_condition_scan(&model, &lambdas, spec.c0, &quad)?;
    let flags = curve.margin_flags();
    let rows: Vec<Vec<f64>> = (0..lambdas.len())
        .map(|i| {
            let f = curve.f_plus[i][(0, 0)];
            let det = curve.det_plus[i];
            vec![lambdas[i], f.re, f.im, det.re, det.im, det.norm(), if flags[i] { 1.0 } else { 0.0 }]
        })
        .collect();
    run.csv("scan.csv", &["lambda", "f11_re", "f11_im", "det_a_re", "det_a_im", "abs_det_a", "margin_ok"], &rows)?;
    let failures: Vec<_> = curve.failures.iter().map(|(l, e)| json!({"lambda": l, "error": e})).collect();
    run.json(
        "scan.json",
        &json!({
            "model_hash": model_hash(cfg)?,
            "rank": model.rank(),
            "c0_target": curve.c0_target,
            "det_margin": curve.det_margin,
            "passed": curve.passed,
            "tail_slope": curve.tail_slope,
            "failures": failures,
        }),
    )?;
    if !curve.failures.is_empty() {
        return Err(Failure::Numeric(format!("{} λ samples failed to evaluate", curve.failures.len())));
    }
    if !curve.passed {
        return Err(Failure::Numeric(format!(
            "spectral condition margin {:.3e} below c₀ = {:.3e}",
            curve.det_margin, curve.c0_target
        )));
    }
    Ok(())
}

/// Closed-form leading coefficient of the scalar channel, where one exists.
fn expected_leading(law: Law, s: Sign, model: &PerturbationModel) -> Option<Complex64> {
    let sigma2 = model.sigma().powi(2);
    match law {
        Law::InverseLambda => Some(Complex64::new(0.0, 0.5 * s.as_f64() * sigma2)),
        Law::LogLambda => Some(Complex64::new(sigma2, 0.0)),
        Law::Constant => None,
    }
}

pub fn expansion_fit(cfg: &RunConfig, base: &Path, run: &mut Run) -> Result<(), Failure> {
    let model = cfg.model.build(base)?;
    let quad = cfg.quad.build()?;
    let spec = &cfg.fit;
    let s = sign(&spec.sign)?;
    let lambda0 = match spec.lambda0 {
        Some(l) => l,
        None => select_lambda0(&model, s, &quad)?,
    };
    let lambdas = logspace(lambda0 * 10f64.powf(-spec.decades), lambda0, spec.points)?;
    let fit = low_energy_fit(&model, s, &lambdas, &quad)?;
    let phi = scalar_channel(&model)?;
    let rows = lambdas
        .iter()
        .map(|&l| {
            let f = f_entry(&phi, &phi, s, l, &quad)?;
            let m = fit.value(l);
            Ok(vec![l, f.re, f.im, m.re, m.im, (f - m).norm()])
        })
        .collect::<Result<Vec<_>, rankwave::Error>>()?;
    run.csv("fit_curve.csv", &["lambda", "f_re", "f_im", "model_re", "model_im", "residual"], &rows)?;
    let expected = expected_leading(fit.law, s, &model);
    let leading_rel_error = expected.map(|e| (fit.leading - e).norm() / e.norm());
    let g11 = if spec.g11 {
        let g = g11_leading(&model, s, lambda0, &quad)?;
        Some(json!({
            "value_re": g.value.re,
            "value_im": g.value.im,
            "closed_form_re": g.closed_form.re,
            "closed_form_im": g.closed_form.im,
            "rel_error": (g.value - g.closed_form).norm() / g.closed_form.norm(),
            "off_diagonal_max": g.off_diagonal.iter().cloned().fold(0.0, f64::max),
            "off_diagonal_last": g.off_diagonal.last(),
        }))
    } else {
        None
    };
    run.json(
        "fit.json",
        &json!({
            "model_hash": model_hash(cfg)?,
            "dimension": cfg.model.d,
            "law": fit.law.name(),
            "lambda0": fit.lambda0,
            "leading_re": fit.leading.re,
            "leading_im": fit.leading.im,
            "secondary_re": fit.secondary.re,
            "secondary_im": fit.secondary.im,
            "expected_leading_re": expected.map(|e| e.re),
            "expected_leading_im": expected.map(|e| e.im),
            "leading_rel_error": leading_rel_error,
            "log_coefficient_re": fit.log_coefficient.map(|c| c.re),
            "remainder_slope": fit.remainder_slope,
            "fit_r2": fit.fit_r2,
            "accepted": fit.accepted,
            "g11": g11,
        }),
    )?;
    if !fit.accepted {
        run.flags.push(format!("remainder fit r² = {:.4} below 0.98", fit.fit_r2));
    }
    Ok(())
}

fn wave_config(model: PerturbationModel, lambda0: f64, cfg: &RunConfig) -> Result<WaveOpConfig, Failure> {
    let mut w = WaveOpConfig::new(model, lambda0)?;
    w.quad = cfg.quad.build()?;
    Ok(w)
}

fn norm_json(r: &NormReport) -> serde_json::Value {
    json!({"p": r.p, "ratio": r.ratio, "weak_l1": r.weak_l1, "family_parameter": r.family_parameter})
}

pub fn wave_apply(cfg: &RunConfig, base: &Path, run: &mut Run) -> Result<(), Failure> {
    let model = cfg.model.build(base)?;
    let d = model.dimension();
    let spec = &cfg.wave;
    if spec.points < 2 || !(spec.half_length > 0.0) {
        return Err(Failure::Usage("the wave grid needs at least 2 points and a positive extent".into()));
    }
    let grid = match d.get() {
        1 => Grid::line(-spec.half_length, 2.0 * spec.half_length / spec.points as f64, spec.points),
        2 => Grid::radial(spec.half_length / spec.points as f64, spec.points),
        _ => return Err(Failure::Usage("wave-apply supports d = 1 (line) and d = 2 (radial)".into())),
    };
    let f = SampledField::from_fn(d, grid, field_fn(&spec.f, d.get(), spec.half_length, cfg.seed)?)?;
    let w = wave_config(model, spec.lambda0, cfg)?;
    let (out, flagged, lambda_max, truncated) = match spec.piece {
        PieceSpec::Full => {
            let o = apply_w_minus(&w, &f)?;
            let n = o.flagged.len();
            (o.field, n, o.lambda_max, o.lambda_truncated)
        }
        PieceSpec::Low | PieceSpec::High => {
            let s = low_high_split(&w, &f)?;
            let piece = if spec.piece == PieceSpec::Low { s.low } else { s.high };
            (piece, 0, s.lambda_max, false)
        }
    };
    let coords = grid.coordinates()?;
    let rows: Vec<Vec<f64>> = coords.iter().zip(&out.values).map(|(&x, v)| vec![x, v.re, v.im]).collect();
    let x = if d.get() == 1 { "x" } else { "r" };
    run.csv("field.csv", &[x, "re", "im"], &rows)?;
    let l1 = NormReport::measure(&out, &f, 1.0, 0.0)?;
    let l2 = NormReport::measure(&out, &f, 2.0, 0.0)?;
    run.json(
        "norms.json",
        &json!({
            "model_hash": model_hash(cfg)?,
            "piece": spec.piece,
            "l1": norm_json(&l1),
            "l2": norm_json(&l2),
            "isometry_drift": (l2.ratio - 1.0).abs(),
            "tail_fraction": out.tail_fraction(),
            "lambda_max": lambda_max,
            "lambda_truncated": truncated,
            "flagged_points": flagged,
        }),
    )?;
    if truncated {
        run.flags.push("λ integral truncated at the grid band".into());
    }
    if flagged > 0 {
        return Err(Failure::Numeric(format!("{flagged} output points exceed the quadrature tolerance")));
    }
    Ok(())
}

pub fn dichotomy(cfg: &RunConfig, base: &Path, run: &mut Run) -> Result<(), Failure> {
    let model = cfg.model.build(base)?;
    let spec = &cfg.dichotomy;
    let w = wave_config(model, spec.lambda0, cfg)?;
    let rep = dichotomy_d1(&w, &spec.r_values, spec.with_low)?;
    if !rep.hilbert_present {
        run.notes.push("every ∫φ_j vanishes: the Hilbert piece is identically absent".into());
    }
    let rows: Vec<Vec<f64>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.r,
                r.hilbert_sup,
                r.norms.ratio,
                r.norms.weak_l1,
                r.log_slope_running,
                r.hilbert_at_zero,
                r.low_sup.unwrap_or(f64::NAN),
                r.adjoint_low_sup.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    run.csv(
        "dichotomy.csv",
        &["R", "sup_abs", "l1_ratio", "weak_l1_ratio", "log_slope_running", "at_zero", "low_sup", "adjoint_low_sup"],
        &rows,
    )?;
    run.json(
        "dichotomy.json",
        &json!({
            "model_hash": model_hash(cfg)?,
            "hilbert_present": rep.hilbert_present,
            "hilbert_slope": rep.hilbert_slope,
            "low_slope": rep.low_slope,
            "adjoint_low_slope": rep.adjoint_low_slope,
            "reference_slope": 2.0 / PI,
        }),
    )
}

pub fn oracle_compare(cfg: &RunConfig, base: &Path, run: &mut Run) -> Result<(), Failure> {
    let model = cfg.model.build(base)?;
    let d = model.dimension();
    let spec = &cfg.oracle;
    let grid = GridSpec::new(d, spec.half_length, spec.points)?;
    let f = field_fn(&spec.f, d.get(), spec.half_length, cfg.seed)?;
    let w = wave_config(model.clone(), spec.lambda0, cfg)?;
    let rep = compare_stationary_vs_time(&w, grid, &f)?;
    // Aronszajn–Krein residual at seeded points off the spectrum
    let dm = discretize(&model, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..spec.ak_samples {
        let re = rng.gen_range(-2.0..6.0);
        let im = rng.gen_range(0.05..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let z = Complex64::new(re, im);
        let r = if dm.rank() > 0 { ak_identity_check(&dm, z)?.residual } else { 0.0 };
        worst = worst.max(r);
        samples.push(json!({"z_re": re, "z_im": im, "residual": r}));
    }
    run.json(
        "oracle.json",
        &json!({
            "model_hash": model_hash(cfg)?,
            "rank": model.rank(),
            "grid": {"d": d.get(), "half_length": spec.half_length, "points": spec.points},
            "T": rep.t,
            "t_limit": rep.t_limit,
            "rel_l2_error": rep.rel_l2_error,
            "rel_l2_error_half": rep.rel_l2_error_half,
            "doubling_change": rep.doubling_change,
            "isometry_drift": rep.isometry_drift,
            "ak_residual": rep.ak_residual,
            "ak_residual_sampled_max": worst,
            "ak_samples": samples,
            "lambda_max": rep.lambda_max,
            "flagged_points": rep.flagged_points,
        }),
    )?;
    if rep.flagged_points > 0 {
        return Err(Failure::Numeric(format!("{} output points exceed the quadrature tolerance", rep.flagged_points)));
    }
    Ok(())
}
