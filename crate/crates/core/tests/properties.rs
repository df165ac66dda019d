use std::f64::consts::PI;

use proptest::prelude::*;
use rankwave::oracle::{discretize, resolvent_direct, GridSpec};
use rankwave::quadrature::{principal_value, QuadConfig};
use rankwave::resolvent::{free_kernel, smooth_cutoff, CutoffSpec, Dimension};
use rankwave::specfun::{bessel_j, bessel_j_prime, bessel_y, bessel_y_prime, hankel, BesselOrder};
use rankwave::spectral::{f_entry, invert_g, orthonormalize_psi, CMatrix, PerturbationModel, PotentialProfile};
use rankwave::{Complex64, Sign};

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn order() -> impl Strategy<Value = BesselOrder> {
    (0..8u32).prop_map(|t| BesselOrder::from_twice(t).unwrap())
}

fn rotated_pair(t: f64) -> PerturbationModel {
    let e1 = PotentialProfile::gaussian(dim(1), 1.0).unwrap();
    let e2 = PotentialProfile::hermite(dim(1), 1.0).unwrap();
    let (s, c) = t.sin_cos();
    let p1 = PotentialProfile::combination(vec![(c, e1.clone()), (s, e2.clone())]).unwrap();
    let p2 = PotentialProfile::combination(vec![(-s, e1), (c, e2)]).unwrap();
    PerturbationModel::finite_rank(dim(1), vec![p1, p2]).unwrap()
}

fn projection(m: &PerturbationModel, x: f64, y: f64) -> f64 {
    m.profiles().iter().map(|p| p.eval(x) * p.eval(y)).sum()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wronskian_and_recurrence(o in order(), z in 0.1f64..100.0) {
        let w = bessel_j(o, z).unwrap() * bessel_y_prime(o, z).unwrap()
            - bessel_j_prime(o, z).unwrap() * bessel_y(o, z).unwrap();
        prop_assert!((w - 2.0 / (PI * z)).abs() < 1e-10);
        if (2..=5).contains(&o.twice_order()) {
            let lo = BesselOrder::from_twice(o.twice_order() - 2).unwrap();
            let hi = BesselOrder::from_twice(o.twice_order() + 2).unwrap();
            let r = bessel_j(lo, z).unwrap() + bessel_j(hi, z).unwrap() - 2.0 * o.nu() / z * bessel_j(o, z).unwrap();
            prop_assert!(r.abs() < 1e-10);
        }
    }

    #[test]
    fn hankel_signs_are_conjugate(o in order(), z in 0.05f64..200.0) {
        let p = hankel(Sign::Plus, o, z).unwrap();
        let m = hankel(Sign::Minus, o, z).unwrap();
        prop_assert_eq!(m, p.conj());
    }

    #[test]
    fn free_kernel_signs_are_conjugate(d in prop::sample::select(vec![1u32, 2, 3, 5, 7]), lambda in 1e-3f64..50.0, r in 1e-3f64..100.0) {
        let p = free_kernel(dim(d), Sign::Plus, lambda, r).unwrap();
        let m = free_kernel(dim(d), Sign::Minus, lambda, r).unwrap();
        prop_assert_eq!(m, p.conj());
    }

    #[test]
    fn cutoff_and_complement_reassemble(z in -1.0f64..4.0) {
        let eta = smooth_cutoff(&CutoffSpec::eta(), z, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&eta));
        prop_assert_eq!(eta + (1.0 - eta), 1.0);
    }

    #[test]
    fn inverse_of_well_conditioned_matrix(entries in prop::collection::vec(-1.0f64..1.0, 18)) {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            let k = 2 * (3 * i + j);
            let diag = if i == j { 4.0 } else { 0.0 };
            Complex64::new(diag + entries[k], entries[k + 1])
        });
        let g = invert_g(&a).unwrap();
        let res = (&g * &a - CMatrix::identity(3, 3)).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(res < 1e-10);
    }

    #[test]
    fn principal_value_of_odd_integrand_vanishes(c in -3.0f64..3.0, w in 0.5f64..4.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let f = move |y: f64| {
            let t = y - c;
            a * (-t * t).exp() / t + b * t * t * t
        };
        let pv = principal_value(f, c, c - w, c + w, &QuadConfig::default()).unwrap();
        prop_assert!(pv.value.abs() < 1e-10);
    }

    #[test]
    fn psi_rotation_keeps_projection_and_sigma(t in 0.0f64..(2.0 * PI), x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let base = rotated_pair(0.0);
        let turned = rotated_pair(t);
        prop_assert!((base.sigma() - turned.sigma()).abs() < 1e-10);
        let (ob, ot) = (orthonormalize_psi(&base).unwrap(), orthonormalize_psi(&turned).unwrap());
        prop_assert!((projection(&ob, x, y) - projection(&ot, x, y)).abs() < 1e-10);
        prop_assert!(ot.profiles()[1].mass().abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn incoming_entry_is_conjugate_of_outgoing(lambda in 0.05f64..8.0, shift in -2.0f64..2.0) {
        let g = PotentialProfile::gaussian(dim(1), 1.0).unwrap();
        let h = PotentialProfile::hermite(dim(1), 1.0).unwrap().translated(shift).unwrap();
        let q = QuadConfig::default();
        for (p, r) in [(&g, &g), (&g, &h)] {
            let plus = f_entry(p, r, Sign::Plus, lambda, &q).unwrap();
            let minus = f_entry(p, r, Sign::Minus, lambda, &q).unwrap();
            prop_assert!((minus - plus.conj()).norm() < 1e-8 * plus.norm().max(1.0));
        }
        // Im F⁺ is π times a spectral density
        prop_assert!(f_entry(&g, &g, Sign::Plus, lambda, &q).unwrap().im >= 0.0);
    }

    #[test]
    fn discrete_resolvents_are_symmetric(seed in prop::collection::vec(-1.0f64..1.0, 8), re in -2.0f64..6.0, im in 0.05f64..2.0) {
        let phi = PotentialProfile::gaussian(dim(1), 1.0).unwrap();
        let dm = discretize(&PerturbationModel::rank_one(0.7, phi).unwrap(), GridSpec::new(dim(1), 20.0, 256).unwrap()).unwrap();
        let bump = |s: &[f64]| dm.sample(|x| Complex64::new(s[0], s[1]) * (-(x[0] - 3.0 * s[2]).powi(2)).exp() * Complex64::cis(2.0 * s[3] * x[0]));
        let (u, v) = (bump(&seed[..4]), bump(&seed[4..]));
        let z = Complex64::new(re, im);
        for perturbed in [false, true] {
            let lhs = dot(&resolvent_direct(&dm, z, &u, perturbed).unwrap(), &v);
            let rhs = dot(&u, &resolvent_direct(&dm, z.conj(), &v, perturbed).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
        }
    }
}
