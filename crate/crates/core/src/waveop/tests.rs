use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::*;
use crate::oracle::{discretize, wave_operator_time_limit, wrap_horizon, Averaging, GridSpec};
use crate::spectral::PotentialProfile;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn scaled(v: &[Complex64], cell: f64) -> Vec<Complex64> {
    v.iter().map(|x| x * cell.sqrt()).collect()
}

fn gauss(d: u32) -> PotentialProfile {
    PotentialProfile::gaussian(dim(d), 1.0).unwrap()
}

fn rank_one(alpha: f64) -> PerturbationModel {
    PerturbationModel::rank_one(alpha, gauss(1)).unwrap()
}

fn pair_family() -> PerturbationModel {
    let g = gauss(1);
    let h = PotentialProfile::hermite(dim(1), 1.0).unwrap();
    let p1 = PotentialProfile::combination(vec![(FRAC_1_SQRT_2, g.clone()), (FRAC_1_SQRT_2, h.clone())]).unwrap();
    let p2 = PotentialProfile::combination(vec![(FRAC_1_SQRT_2, g), (-FRAC_1_SQRT_2, h)]).unwrap();
    PerturbationModel::finite_rank(dim(1), vec![p1, p2]).unwrap()
}

fn line() -> Grid {
    Grid::line(-40.0, 80.0 / 2048.0, 2048)
}

fn packet(k: f64) -> impl Fn(&[f64]) -> Complex64 {
    move |x: &[f64]| Complex64::cis(k * x[0]) * (-x[0] * x[0] / 8.0).exp()
}

fn field(k: f64) -> SampledField {
    SampledField::from_fn(dim(1), line(), packet(k)).unwrap()
}

#[test]
fn zero_coupling_is_identity() {
    let f = field(2.5);
    for model in [rank_one(0.0), PerturbationModel::finite_rank(dim(1), vec![]).unwrap()] {
        let cfg = WaveOpConfig::new(model, 1.0).unwrap();
        let out = apply_w_minus(&cfg, &f).unwrap();
        assert_eq!(out.field.values, f.values);
        let split = low_high_split(&cfg, &f).unwrap();
        assert!(split.low.values.iter().chain(&split.high.values).all(|v| v.norm() == 0.0));
    }
}

#[test]
fn config_rejects_bad_scale() {
    assert!(WaveOpConfig::new(rank_one(1.0), 0.0).is_err());
    assert!(WaveOpConfig::new(rank_one(1.0), f64::NAN).is_err());
}

#[test]
fn isometry_on_benchmarks() {
    for model in [rank_one(1.0), pair_family()] {
        let cfg = WaveOpConfig::new(model, 1.0).unwrap();
        for k in [1.0, 2.5] {
            let f = field(k);
            let out = apply_w_minus(&cfg, &f).unwrap();
            let ratio = out.field.lp_norm(2.0).unwrap() / f.lp_norm(2.0).unwrap();
            assert!((ratio - 1.0).abs() < 1e-2, "k = {k}: {ratio}");
            assert!(out.flagged.is_empty());
            assert!(!out.lambda_truncated);
        }
    }
}

#[test]
fn matches_time_domain_limit() {
    let grid = GridSpec::new(dim(1), 40.0, 2048).unwrap();
    for (model, tol) in [(rank_one(1.0), 5e-2), (pair_family(), 8e-2)] {
        let dm = discretize(&model, grid).unwrap();
        let fv = dm.sample(packet(2.5));
        let t = 0.5 * wrap_horizon(&dm, &fv);
        let oracle = dm.unscale(&wave_operator_time_limit(&dm, &fv, t, Averaging::Window).unwrap().values);
        let out = apply_w_minus(&WaveOpConfig::new(model, 1.0).unwrap(), &field(2.5)).unwrap();
        let err = rel_l2(&out.field.values, &oracle);
        assert!(err < tol, "{err}");
        // the scattered parts alone, a sharper comparison
        let f = field(2.5);
        let a: Vec<Complex64> = f.values.iter().zip(&out.field.values).map(|(x, y)| x - y).collect();
        let b: Vec<Complex64> = f.values.iter().zip(&oracle).map(|(x, y)| x - y).collect();
        assert!(rel_l2(&a, &b) < 5e-2, "{}", rel_l2(&a, &b));
    }
}

#[test]
fn split_adds_up_to_full() {
    for model in [rank_one(1.0), pair_family()] {
        let cfg = WaveOpConfig::new(model, 1.0).unwrap();
        let f = field(1.0);
        let split = low_high_split(&cfg, &f).unwrap();
        let full = scattered_piece(&cfg, &f, Piece::Full).unwrap();
        let sum: Vec<Complex64> = split.low.values.iter().zip(&split.high.values).map(|(a, b)| a + b).collect();
        assert!(rel_l2(&sum, &full.values) < 1e-6, "{}", rel_l2(&sum, &full.values));
        let w = apply_w_minus(&cfg, &f).unwrap();
        let direct: Vec<Complex64> = f.values.iter().zip(&w.field.values).map(|(a, b)| a - b).collect();
        assert!(rel_l2(&sum, &direct) < 1e-6);
    }
}

#[test]
fn high_frequency_packet_has_small_low_part() {
    let cfg = WaveOpConfig::new(rank_one(1.0), 1.0).unwrap();
    let split = low_high_split(&cfg, &field(6.0)).unwrap();
    let low = split.low.lp_norm(2.0).unwrap();
    let high = split.high.lp_norm(2.0).unwrap();
    assert!(high > 0.0 && low / high < 0.1, "{low} / {high}");
}

fn deviation(profile: &PotentialProfile, alpha: f64, f: &SampledField) -> f64 {
    let model = PerturbationModel::rank_one(alpha, profile.clone()).unwrap();
    let out = apply_w_minus(&WaveOpConfig::new(model, 1.0).unwrap(), f).unwrap();
    let d: f64 = out.field.values.iter().zip(&f.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    (d / f.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

#[test]
fn linear_in_small_coupling() {
    let f = field(1.0);
    let hat = PotentialProfile::mexican_hat(dim(1), 1.0).unwrap();
    let (a, b, c) = (deviation(&hat, 0.01, &f), deviation(&hat, 0.02, &f), deviation(&hat, 0.04, &f));
    assert!((b / a - 2.0).abs() < 0.1, "{}", b / a);
    assert!((c / b - 2.0).abs() < 0.1, "{}", c / b);
    // ∫φ ≠ 0 in d = 1: Γ ≈ 2λ/(i m²) for λ ≲ αm², so the limit is strong but slower than linear
    let g = gauss(1);
    let devs: Vec<f64> = [0.04, 0.02, 0.01, 0.005].iter().map(|&a| deviation(&g, a, &f)).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    assert!(devs[3] < 0.05, "{devs:?}");
}

#[test]
fn intertwines_free_and_perturbed_hamiltonians() {
    let model = rank_one(1.0);
    let grid = GridSpec::new(dim(1), 40.0, 2048).unwrap();
    let dm = discretize(&model, grid).unwrap();
    let cfg = WaveOpConfig::new(model, 1.0).unwrap();
    let f = field(1.5);
    let wf = apply_w_minus(&cfg, &f).unwrap();
    let lhs = dm.unscale(&dm.apply_h(&scaled(&wf.field.values, grid.cell())));
    // H₀f = −f'' spectrally
    let fh = dm.fourier().forward(&scaled(&f.values, grid.cell()));
    let h0f: Vec<Complex64> = fh.iter().zip(&dm.h0_symbol).map(|(v, s)| v * s).collect();
    let h0f = f.with_values(dm.unscale(&dm.fourier().inverse(&h0f))).unwrap();
    let rhs = apply_w_minus(&cfg, &h0f).unwrap();
    let diff: Vec<Complex64> = lhs.iter().zip(&rhs.field.values).map(|(a, b)| a - b).collect();
    let norm: f64 = f.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let err = diff.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / norm;
    assert!(err < 5e-2, "{err}");
}

#[test]
fn input_grid_must_match_model() {
    let cfg = WaveOpConfig::new(rank_one(1.0), 1.0).unwrap();
    let f2 = SampledField::from_fn(dim(2), Grid::radial(0.1, 10), |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(apply_w_minus(&cfg, &f2).is_err());
    let other = cfg.clone().with_x_grid(Grid::line(0.0, 0.5, 4));
    assert!(apply_w_minus(&other, &field(1.0)).is_err());
    assert!(scattered_piece(&other, &field(1.0), Piece::Low).is_ok());
}

#[test]
fn hilbert_kernel_values() {
    assert_eq!(hilbert_piece(0.5, 0.7), Complex64::new(0.0, 0.0));
    assert_eq!(hilbert_piece(3.0, 2.0), Complex64::new(0.0, 0.0));
    let v = hilbert_piece(0.0, 3.0);
    let want = Complex64::new(0.0, -1.0 / (3.0 * PI));
    assert!((v - want).norm() < 1e-16);
    // only the 1/(|x| − |y|) part changes sign under |x| ↔ |y|
    let (x, y) = (0.3, 5.0);
    let sym = Complex64::new(0.0, -1.0 / (2.0 * PI)) * (1.0 / (x + y));
    assert!((hilbert_piece(x, y) + hilbert_piece(y, x) - 2.0 * sym).norm() < 1e-16);
    assert_eq!(hilbert_piece(-x, y), hilbert_piece(x, -y));
}

fn hilbert_closed_form(x: f64, r: f64) -> f64 {
    let a = x.abs();
    (((a + r) / (a + 2.0)).ln() + ((r - a) / (2.0 - a)).ln()) / PI
}

#[test]
fn hilbert_shell_matches_closed_form() {
    let v = hilbert_on_shell(0.0, 2.0, 20.0).unwrap();
    assert!((v.norm() - 2.0 / PI * 10f64.ln()).abs() < 1e-10);
    assert!((v.norm() - 1.4659).abs() < 1e-4);
    assert_eq!(hilbert_on_shell(0.0, 2.0, 2.0).unwrap().norm(), 0.0);
    for x in inner_points() {
        for r in [20.0, 200.0, 2000.0] {
            let v = hilbert_on_shell(x, 2.0, r).unwrap();
            assert!((v.im + hilbert_closed_form(x, r)).abs() < 1e-9 && v.re == 0.0);
        }
    }
}

#[test]
fn dichotomy_sweep_grows_logarithmically() {
    let cfg = WaveOpConfig::new(rank_one(1.0), 1.0).unwrap();
    let rep = dichotomy_d1(&cfg, &[20.0, 200.0, 2000.0], true).unwrap();
    assert!(rep.hilbert_present);
    for row in &rep.rows {
        let want = 2.0 / PI * (row.r / 2.0).ln();
        assert!((row.hilbert_at_zero - want).abs() < 1e-2 * want);
        assert!(row.hilbert_sup >= row.hilbert_at_zero);
        let sup = inner_points().iter().map(|&x| hilbert_closed_form(x, row.r)).fold(0.0, f64::max);
        assert!((row.hilbert_sup - sup).abs() < 1e-8);
        assert!(row.norms.ratio > 0.0 && row.norms.weak_l1 > 0.0);
    }
    assert!((rep.hilbert_slope - 2.0 / PI).abs() < 0.2 * 2.0 / PI, "{}", rep.hilbert_slope);
    // the displayed kernel is that of the adjoint: (𝒲^l)^* inherits the growth, 𝒲^l itself stays bounded on f_R
    assert!(rep.adjoint_low_slope.unwrap() > 0.3, "{:?}", rep.adjoint_low_slope);
    assert!(rep.low_slope.unwrap().abs() < 0.05, "{:?}", rep.low_slope);
    // the piece commutes with dilations and the window |x| ≤ 4R scales with R, so both ratios are R-independent up to the inner edge
    for w in rep.rows.windows(2) {
        assert!((w[1].norms.ratio / w[0].norms.ratio - 1.0).abs() < 2e-2, "{:?}", rep.rows);
        assert!((w[1].norms.weak_l1 / w[0].norms.weak_l1 - 1.0).abs() < 0.15, "{:?}", rep.rows);
    }
    assert!(matches!(dichotomy_d1(&cfg, &[1.0], false), Err(Error::Invalid(_))));
}

#[test]
fn dichotomy_reports_absent_hilbert_piece_for_mean_zero() {
    let hat = PotentialProfile::mexican_hat(dim(1), 1.0).unwrap();
    let cfg = WaveOpConfig::new(PerturbationModel::rank_one(1.0, hat).unwrap(), 1.0).unwrap();
    let rep = dichotomy_d1(&cfg, &[20.0, 200.0], false).unwrap();
    assert!(!rep.hilbert_present);
    assert!(rep.rows.iter().all(|r| r.hilbert_sup == 0.0));
}

#[test]
fn lp_norm_examples() {
    let d1 = dim(1);
    let n = 100_000;
    let grid = Grid::line(-2.0, 4.0 / n as f64, n);
    let ind = SampledField::from_fn(d1, grid, |x| Complex64::new(if x[0].abs() < 0.5 { 1.0 } else { 0.0 }, 0.0)).unwrap();
    let norms = lp_norms(&ind, &[1.0, 2.0]).unwrap();
    assert!((norms.lp[0].1 - 1.0).abs() < 1e-4);
    assert!((norms.lp[1].1 - 1.0).abs() < 1e-4);
    assert_eq!(norms.sup, 1.0);
    assert!((norms.weak_l1 - 1.0).abs() < 1e-4);
    assert!(!norms.tail_warning);

    let r = 100.0;
    let h = 1e-3;
    let grid = Grid::line(1.0 + 0.5 * h, h, ((r - 1.0) / h) as usize);
    let g = SampledField::from_fn(d1, grid, |x| Complex64::new(1.0 / x[0], 0.0)).unwrap();
    assert!((g.lp_norm(1.0).unwrap() - r.ln()).abs() < 1e-6);
    // sup_t t·|{1/x > t}| = sup_{t ≥ 1/R} (1 − t) = 1 − 1/R
    assert!((g.weak_l1() - (1.0 - 1.0 / r)).abs() < 2e-3, "{}", g.weak_l1());

    let bump = |s: f64| {
        SampledField::from_fn(d1, Grid::symmetric(50.0, 20001), move |x| Complex64::new((-(s * x[0]).powi(2)).exp(), 0.0))
            .unwrap()
            .lp_norm(1.0)
            .unwrap()
    };
    assert!((bump(2.0) - 0.5 * bump(1.0)).abs() < 1e-10);
    assert!(ind.lp_norm(0.5).is_err());
}

#[test]
fn tail_warning_flags_slow_decay() {
    let g = SampledField::from_fn(dim(1), Grid::symmetric(10.0, 2001), |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(lp_norms(&g, &[1.0]).unwrap().tail_warning);
    let g = SampledField::from_fn(dim(2), Grid::radial(0.1, 100), |_| Complex64::new(1.0, 0.0)).unwrap();
    let want = PI * 100.0;
    assert!((g.lp_norm(1.0).unwrap() - want).abs() < 1e-9 * want);
}

#[test]
fn centered_kernel_parts() {
    let q = QuadConfig::default();
    let (_, delta) = centered_parts(|_| 1.0, 3.0, 1.0, &q).unwrap();
    assert!((delta - PI).abs() < 1e-12);
    let (pv, delta) = centered_parts(|r| if r < 1.0 { 1.0 } else { 0.0 }, 1.0, 2.0, &q).unwrap();
    assert!((pv - PI * (4.0f64 / 3.0).ln()).abs() < 1e-10, "{pv}");
    assert_eq!(delta, 0.0);
    // PV through the pole: g ≡ 1 on |y| < 2 at r = 1 gives π ln(1/3)
    let (pv, _) = centered_parts(|_| 1.0, 2.0, 1.0, &q).unwrap();
    assert!((pv - PI * (1.0f64 / 3.0).ln()).abs() < 1e-8, "{pv}");
}

fn radial_gaussian(h: f64, len: usize, w: f64) -> SampledField {
    SampledField::from_fn(dim(2), Grid::radial(h, len), move |r| Complex64::new((-r[0] * r[0] / (2.0 * w * w)).exp(), 0.0))
        .unwrap()
}

#[test]
fn tphi_routes_agree() {
    let phi = gauss(2);
    let f = radial_gaussian(0.1, 160, 1.0);
    let direct = tphi_apply(&phi, &f).unwrap();
    let stat = tphi_stationary(&phi, &f, &QuadConfig::default()).unwrap();
    // compare away from the truncated outer edge
    let n = 120;
    let err = rel_l2(&direct.values[..n], &stat.values[..n]);
    assert!(err < 1e-2, "{err}");
}

#[test]
fn factorized_low_energy_matches_direct_assembly() {
    let cfg = WaveOpConfig::new(PerturbationModel::rank_one(1.0, gauss(2)).unwrap(), 1.0).unwrap();
    let f = radial_gaussian(0.1, 160, 1.0);
    let fact = low_energy_factorized(&cfg, &f).unwrap();
    let direct = scattered_piece(&cfg, &f, Piece::Low).unwrap();
    let n = 120;
    let err = rel_l2(&fact.values[..n], &direct.values[..n]);
    assert!(err < 5e-2, "{err}");
    assert!(low_energy_factorized(&WaveOpConfig::new(rank_one(1.0), 1.0).unwrap(), &field(1.0)).is_err());
}

#[test]
fn tphi_rejects_non_radial_input() {
    let phi = gauss(2);
    let f = SampledField::from_fn(dim(2), Grid::Plane { start: -1.0, spacing: 0.5, n: 5 }, |_| Complex64::new(1.0, 0.0)).unwrap();
    assert!(tphi_apply(&phi, &f).is_err());
    assert!(tphi_apply(&gauss(1), &field(1.0)).is_err());
}


#[test]
fn adjoint_shell_assembly_is_the_adjoint() {
    // ⟨𝒲^l f, g⟩ = ⟨f, (𝒲^l)^* g⟩ with f a bump and g = 1_{2<|y|<12}
    let cfg = WaveOpConfig::new(pair_family(), 1.0).unwrap();
    let f = SampledField::from_fn(dim(1), Grid::symmetric(6.0, 1201), |x| Complex64::new((-(x[0] - 0.7).powi(2)).exp(), 0.3 * x[0]))
        .unwrap();
    let h = 0.01;
    let ys: Vec<f64> = (0..1000).map(|k| 2.0 + (k as f64 + 0.5) * h).flat_map(|y| [y, -y]).collect();
    let cfg_y = cfg.clone().with_x_grid(Grid::line(0.0, 1.0, 1));
    let src = FieldSource::new(&f).unwrap();
    let wf = assemble(&cfg_y, &src, &ys, &[Piece::Low], Coupling::Model).unwrap();
    let lhs: Complex64 = wf.values[0].iter().sum::<Complex64>() * h;
    let xs = f.grid.coordinates().unwrap();
    let adj = assemble_adjoint_shell(&cfg, 2.0, 12.0, &xs).unwrap();
    let rhs: Complex64 = f.values.iter().zip(&adj).map(|(a, b)| a * b.conj()).sum::<Complex64>() * f.grid.spacing();
    assert!((lhs - rhs).norm() < 1e-4 * lhs.norm(), "{lhs} vs {rhs}");
}

#[test]
fn mean_zero_l1_ratio_is_stable_over_bumps() {
    let hat = PotentialProfile::mexican_hat(dim(1), 1.0).unwrap();
    let cfg = WaveOpConfig::new(PerturbationModel::rank_one(1.0, hat).unwrap(), 1.0).unwrap();
    let members: Vec<Bump> = [0.5, 5.0, 50.0]
        .iter()
        .flat_map(|&s| [0.0, 3.0 * s].map(|c| Bump { shift: c, scale: s }))
        .collect();
    let reps = l1_family_d1(&cfg, &members).unwrap();
    let ratios: Vec<f64> = reps.iter().map(|r| r.ratio).collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 3.0, "{ratios:?}");
    // wide bumps barely see the perturbation
    assert!((reps[4].ratio - 1.0).abs() < 0.05, "{ratios:?}");
}

#[test]
fn tphi_is_weak_type_but_not_l1_bounded() {
    let phi = PotentialProfile::gaussian(dim(2), 1.0).unwrap();
    let reps = tphi_dilation_family(&phi, &[100.0, 10.0, 1.0], Grid::radial(0.1, 10_000)).unwrap();
    let l1: Vec<f64> = reps.iter().map(|r| r.ratio).collect();
    let weak: Vec<f64> = reps.iter().map(|r| r.weak_l1).collect();
    assert!(l1.windows(2).all(|w| w[1] > w[0]), "{l1:?}");
    // the output tail −(∫φ)²(∫f)/(4π²|x|²) adds (∫φ)²/2π · ln 10 per decade of s
    let per_decade = phi.mass().powi(2) / (2.0 * PI) * 10f64.ln();
    assert!(((l1[1] - l1[0]) - per_decade).abs() < 0.02 * per_decade, "{l1:?} vs {per_decade}");
    let (hi, lo) = (weak.iter().cloned().fold(0.0, f64::max), weak.iter().cloned().fold(f64::INFINITY, f64::min));
    assert!(hi / lo < 10.0, "{weak:?}");
    assert!(tphi_dilation_family(&phi, &[200.0], Grid::radial(0.1, 10_000)).is_err());
}
