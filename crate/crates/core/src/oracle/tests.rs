use super::*;
use crate::spectral::{f_entry, PotentialProfile};
use crate::quadrature::QuadConfig;
use crate::Sign;

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn gauss1() -> PotentialProfile {
    PotentialProfile::gaussian(dim(1), 1.0).unwrap()
}

fn pair_family() -> PerturbationModel {
    let g = gauss1();
    let h = PotentialProfile::hermite(dim(1), 1.0).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let p1 = PotentialProfile::combination(vec![(s, g.clone()), (s, h.clone())]).unwrap();
    let p2 = PotentialProfile::combination(vec![(s, g), (-s, h)]).unwrap();
    PerturbationModel::finite_rank(dim(1), vec![p1, p2]).unwrap()
}

fn grid1(n: usize) -> GridSpec {
    GridSpec::new(dim(1), 40.0, n).unwrap()
}

#[test]
fn grid_validation() {
    assert!(GridSpec::new(dim(1), 40.0, 100).is_err());
    assert!(GridSpec::new(dim(1), 40.0, 128).is_err());
    assert!(GridSpec::new(dim(2), 20.0, 64).is_ok());
    assert!(GridSpec::new(dim(3), 20.0, 64).is_err());
    let g = grid1(256);
    assert_eq!(g.axis()[0], -40.0);
    assert!((g.frequencies()[1] - PI / 40.0).abs() < 1e-15);
}

#[test]
fn gaussian_grid_mass() {
    let model = PerturbationModel::rank_one(1.0, gauss1()).unwrap();
    let dm = discretize(&model, grid1(2048)).unwrap();
    let exact = 2f64.sqrt() * PI.powf(0.25);
    assert!((dm.report.grid_mass[0] - exact).abs() < 1e-8);
    assert!(dm.report.norm_drift[0] < 1e-10);
}

#[test]
fn family_is_orthonormal_on_the_grid() {
    let dm = discretize(&pair_family(), grid1(2048)).unwrap();
    assert!(dm.report.orthonormality_drift < 1e-6);
}

#[test]
fn leakage_is_rejected() {
    // (1 + x²)^{−2} is still 4e−7 of its peak at the box edge
    let slow = PotentialProfile::algebraic(dim(1), 4.0).unwrap();
    let model = PerturbationModel::rank_one(1.0, slow).unwrap();
    let g = GridSpec::new(dim(1), 40.0, 512).unwrap();
    assert!(matches!(discretize(&model, g), Err(Error::BoundaryLeakage(_))));
}

#[test]
fn empty_model_is_the_free_operator() {
    let model = PerturbationModel::finite_rank(dim(1), vec![]).unwrap();
    let dm = discretize(&model, grid1(256)).unwrap();
    let f = dm.sample(|x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
    let hf = dm.apply_h(&f);
    let fh = dm.fourier().forward(&f);
    let lap = dm.fourier().inverse(&fh.iter().zip(&dm.h0_symbol).map(|(v, s)| v * s).collect::<Vec<_>>());
    assert!(hf.iter().zip(&lap).all(|(a, b)| (a - b).norm() < 1e-14));
}

#[test]
fn free_resolvent_roundtrip_and_positivity() {
    let model = PerturbationModel::rank_one(1.0, gauss1()).unwrap();
    let dm = discretize(&model, grid1(512)).unwrap();
    let phi = dm.projections[0].clone();
    let u = resolvent_direct(&dm, Complex64::new(-1.0, 0.0), &phi, false).unwrap();
    assert!(dot(&u, &phi).re > 0.0);
    let z = Complex64::new(2.0, 0.5);
    let u = resolvent_direct(&dm, z, &phi, false).unwrap();
    let uh = dm.fourier().forward(&u);
    let back = dm.fourier().inverse(&uh.iter().zip(&dm.h0_symbol).map(|(v, s)| v * (s - z)).collect::<Vec<_>>());
    assert!(back.iter().zip(&phi).all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(resolvent_direct(&dm, Complex64::new(1.0, 0.0), &phi, false).is_err());
    // ⟨R₀(z)u, v⟩ = ⟨u, R₀(z̄)v⟩
    let v = dm.sample(|x| Complex64::new(0.0, (-(x[0] - 1.0).powi(2)).exp()));
    let lhs = dot(&resolvent_direct(&dm, z, &phi, false).unwrap(), &v);
    let rhs = dot(&phi, &resolvent_direct(&dm, z.conj(), &v, false).unwrap());
    assert!((lhs - rhs).norm() < 1e-13);
}

#[test]
fn perturbed_resolvent_solves_the_equation() {
    let dm = discretize(&pair_family(), grid1(512)).unwrap();
    let z = Complex64::new(3.0, 0.2);
    let rhs = dm.sample(|x| Complex64::new((-(x[0] + 0.5).powi(2)).exp(), 0.3));
    let u = resolvent_direct(&dm, z, &rhs, true).unwrap();
    let hu = dm.apply_h(&u);
    let res: Vec<Complex64> = hu.iter().zip(&u).zip(&rhs).map(|((h, u), r)| h - u * z - r).collect();
    assert!(norm(&res) < 1e-10 * norm(&rhs));
}

#[test]
fn boundary_value_matches_f_entry() {
    // ⟨R₀(λ² + iε)φ, φ⟩ at ε and ε/2, linearly extrapolated to ε = 0; the
    // box is large enough that the level spacing π/L is far below ε and the
    // periodic images are damped by e^{−εL/2}
    let phi = gauss1();
    let model = PerturbationModel::rank_one(1.0, phi.clone()).unwrap();
    let dm = discretize(&model, GridSpec::new(dim(1), 1e5, 1 << 21).unwrap()).unwrap();
    let p = dm.projections[0].clone();
    let val = |eps: f64| dot(&resolvent_direct(&dm, Complex64::new(1.0, eps), &p, false).unwrap(), &p);
    let eps = 1e-3;
    let extrap = val(eps / 2.0) * 2.0 - val(eps);
    let f = f_entry(&phi, &phi, Sign::Plus, 1.0, &QuadConfig::default()).unwrap();
    assert!((extrap - f).norm() < 1e-4 * f.norm(), "{extrap} vs {f}");
}

#[test]
fn ak_identity_rank_one_and_two() {
    let zs = [
        Complex64::new(4.0, 1e-3),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.5, 0.1),
        Complex64::new(10.0, -2.0),
    ];
    let one = discretize(&PerturbationModel::rank_one(1.0, gauss1()).unwrap(), grid1(1024)).unwrap();
    let two = discretize(&pair_family(), grid1(1024)).unwrap();
    for z in zs {
        let r = ak_identity_check(&one, z).unwrap();
        assert!(r.residual < 1e-10, "{r:?}");
        assert!(r.scalar_form_difference.unwrap() < 1e-12);
        let r = ak_identity_check(&two, z).unwrap();
        assert!(r.residual < 1e-10, "{r:?}");
        assert!(r.scalar_form_difference.is_none());
    }
}

fn packet(dm: &DiscreteModel) -> Vec<Complex64> {
    dm.sample(|x| Complex64::cis(2.5 * x[0]) * (-x[0] * x[0] / 8.0).exp())
}

#[test]
fn time_limit_trivial_coupling_and_isometry() {
    let zero = discretize(&PerturbationModel::rank_one(0.0, gauss1()).unwrap(), grid1(1024)).unwrap();
    let f = packet(&zero);
    let w = wave_operator_time_limit(&zero, &f, 1.0, Averaging::Window).unwrap();
    assert_eq!(w.values, f);

    let dm = discretize(&PerturbationModel::rank_one(1.0, gauss1()).unwrap(), grid1(1024)).unwrap();
    let f = packet(&dm);
    let limit = wrap_horizon(&dm, &f);
    let w = wave_operator_time_limit(&dm, &f, 0.5 * limit, Averaging::Window).unwrap();
    assert!((w.isometry - 1.0).abs() < 1e-2, "{}", w.isometry);
    let w2 = wave_operator_time_limit(&dm, &f, 0.25 * limit, Averaging::Window).unwrap();
    let diff: Vec<Complex64> = w.values.iter().zip(&w2.values).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) < 2e-2 * norm(&f));
    assert!(matches!(
        wave_operator_time_limit(&dm, &f, limit, Averaging::Window),
        Err(Error::WrapAround { .. })
    ));
}

#[test]
fn propagation_is_unitary() {
    let dm = discretize(&pair_family(), grid1(512)).unwrap();
    let sp = dm.spectrum().unwrap();
    let f = dm.fourier().forward(&packet(&dm));
    for &t in &[-3.0, 0.7, 25.0] {
        let g = sp.exp_i(t, &f);
        assert!((norm(&g) - norm(&f)).abs() < 1e-10 * norm(&f));
    }
}

#[test]
fn spectrum_reproduces_h() {
    // Q Λ Q^* x = H x for a grid vector
    let dm = discretize(&pair_family(), grid1(512)).unwrap();
    let sp = dm.spectrum().unwrap();
    let x = packet(&dm);
    let xh = dm.fourier().forward(&x);
    let mut y = sp.to_eigen(&xh);
    for (v, l) in y.iter_mut().zip(sp.eigenvalues()) {
        *v *= l;
    }
    let hx = dm.fourier().inverse(&sp.from_eigen(&y));
    let direct = dm.apply_h(&x);
    let diff: Vec<Complex64> = hx.iter().zip(&direct).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) < 1e-9 * norm(&direct), "{}", norm(&diff) / norm(&direct));
}

#[test]
fn two_dimensional_grid() {
    let g = PotentialProfile::gaussian(dim(2), 1.0).unwrap();
    let model = PerturbationModel::rank_one(1.0, g).unwrap();
    let dm = discretize(&model, GridSpec::new(dim(2), 12.0, 64).unwrap()).unwrap();
    assert!((dm.report.grid_mass[0] - PotentialProfile::gaussian_mass(2)).abs() < 1e-8);
    let r = ak_identity_check(&dm, Complex64::new(2.0, 0.3)).unwrap();
    assert!(r.residual < 1e-10);
    let sp = dm.spectrum().unwrap();
    let f = dm.fourier().forward(&dm.sample(|x| Complex64::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0)));
    let g = sp.exp_i(1.3, &f);
    assert!((norm(&g) - norm(&f)).abs() < 1e-10 * norm(&f));
}
