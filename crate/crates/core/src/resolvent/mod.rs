//! Free resolvent kernels `R₀^±(λ²; r)` of `−Δ` in `ℝ^d`, their
//! zero-energy parts and remainders, and the amplitude factorizations used
//! in the oscillatory analysis.
//!
//! Conventions: `R₀^±(λ²) = (−Δ − λ² ∓ i0)^{-1}`, `r = |x − y|`, and
//! `R₀^±(λ²; r) = λ^{d−2} K^±(λr)` with `K^± = R₀^±(1; ·)`.

mod cutoff;

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{self, EULER_GAMMA};
use crate::Sign;

pub use cutoff::{smooth_cutoff, CutoffSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Spatial dimension; kernels exist for `d ∈ {1, 2, 3, 5, 7}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        match d {
            1 | 2 | 3 | 5 | 7 => Ok(Dimension(d)),
            _ => Err(Error::Unsupported(format!("dimension {d}"))),
        }
    }

    /// Dimensions covered by the full wave-operator pipeline.
    pub fn pipeline(d: u32) -> Result<Self> {
        match d {
            1..=3 => Ok(Dimension(d)),
            _ => Err(Error::Unsupported(format!("dimension {d} outside the pipeline (1, 2, 3)"))),
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }

    /// Surface area of the unit sphere `S^{d−1}`.
    pub fn sphere_area(self) -> f64 {
        sphere_area(self.0)
    }
}

/// `|S^{n−1}|` for `n ≥ 1` (`|S^0| = 2`).
pub fn sphere_area(n: u32) -> f64 {
    // 2π^{n/2}/Γ(n/2)
    let mut area = [2.0, 2.0 * PI];
    for k in 2..n {
        let next = 2.0 * PI / (k - 1) as f64 * area[0];
        area[0] = area[1];
        area[1] = next;
    }
    if n == 1 {
        2.0
    } else {
        area[1]
    }
}

/// Pieces of the free kernel that can be requested by tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelPart {
    Full,
    Fundamental,
    Remainder,
    AmplitudeW0,
    AmplitudeW1,
    LargeArgPhi,
    SpectralMeasureJ,
}

impl KernelPart {
    pub fn parse(s: &str) -> Option<KernelPart> {
        Some(match s {
            "full" => KernelPart::Full,
            "fundamental" => KernelPart::Fundamental,
            "remainder" => KernelPart::Remainder,
            "amplitude_w0" => KernelPart::AmplitudeW0,
            "amplitude_w1" => KernelPart::AmplitudeW1,
            "large_arg_phi" => KernelPart::LargeArgPhi,
            "spectral_measure_j" => KernelPart::SpectralMeasureJ,
            _ => return None,
        })
    }
}

/// The d = 2 constant `c^± = ±i/4 − γ/2π + (log 2)/2π`.
pub fn d2_constant(sign: Sign) -> Complex64 {
    Complex64::new((LN_2 - EULER_GAMMA) / (2.0 * PI), sign.as_f64() * 0.25)
}

/// `(4π)^{−(d−1)/2}`, the prefactor of the odd-dimensional closed form.
pub fn odd_prefactor(d: u32) -> f64 {
    (4.0 * PI).powf(-((d as f64 - 1.0) / 2.0))
}

/// Coefficients `(d−3−k)! / (k! ((d−3)/2 − k)!)`, `k = 0..=(d−3)/2`.
fn odd_coefficients(d: u32) -> Vec<f64> {
    let m = (d - 3) / 2;
    let fact = |n: u32| (1..=n).fold(1.0, |a, j| a * j as f64);
    (0..=m).map(|k| fact(d - 3 - k) / (fact(k) * fact(m - k))).collect()
}

/// Fundamental-solution constant of `−Δ` in odd `d ≥ 3`: `Γ(d/2 − 1)/(4π^{d/2})`,
/// equal to the zero-energy limit of the odd closed form.
pub fn fundamental_constant(d: u32) -> f64 {
    odd_prefactor(d) * odd_coefficients(d)[0]
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    Ok(())
}

fn check_r(d: Dimension, r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("r must be nonnegative, got {r}")));
    }
    if r == 0.0 && d.0 >= 2 {
        return Err(Error::Singularity(d.0));
    }
    Ok(())
}

/// `R₀^±(λ²; r)`.
pub fn free_kernel(d: Dimension, sign: Sign, lambda: f64, r: f64) -> Result<Complex64> {
    check_lambda(lambda)?;
    check_r(d, r)?;
    Ok(free_kernel_unchecked(d.0, sign, lambda, r))
}

#[inline]
pub(crate) fn free_kernel_unchecked(d: u32, sign: Sign, lambda: f64, r: f64) -> Complex64 {
    let s = sign.as_f64();
    let z = lambda * r;
    match d {
        1 => Complex64::new(0.0, s / (2.0 * lambda)) * Complex64::cis(s * z),
        2 => {
            let (j, y) = specfun::jy_any(0, z);
            Complex64::new(0.0, s * 0.25) * Complex64::new(j, s * y)
        }
        _ => {
            let coef = odd_coefficients(d);
            let w = Complex64::new(0.0, -2.0 * s * z);
            let mut p = Complex64::new(0.0, 0.0);
            let mut wk = Complex64::new(1.0, 0.0);
            for c in coef {
                p += c * wk;
                wk *= w;
            }
            odd_prefactor(d) * Complex64::cis(s * z) * p / r.powi(d as i32 - 2)
        }
    }
}

/// Zero-energy part `G₀(r)`: `−r/2`, `−(1/2π) log r`, or `c r^{2−d}`.
pub fn fundamental_kernel(d: Dimension, r: f64) -> Result<f64> {
    check_r(d, r)?;
    Ok(fundamental_unchecked(d.0, r))
}

#[inline]
pub(crate) fn fundamental_unchecked(d: u32, r: f64) -> f64 {
    match d {
        1 => -r / 2.0,
        2 => -r.ln() / (2.0 * PI),
        _ => fundamental_constant(d) / r.powi(d as i32 - 2),
    }
}

/// `R₀^+(λ²; r) − R₀^−(λ²; r) = (i/2)(λ/2πr)^ν J_ν(λr)`, `ν = (d−2)/2`,
/// bounded at `r = 0`.
pub fn spectral_measure_kernel(d: Dimension, lambda: f64, r: f64) -> Result<Complex64> {
    check_lambda(lambda)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("r must be nonnegative, got {r}")));
    }
    Ok(spectral_measure_unchecked(d.0, lambda, r))
}

pub(crate) fn spectral_measure_unchecked(d: u32, lambda: f64, r: f64) -> Complex64 {
    let z = lambda * r;
    if z < 0.5 && d != 1 {
        // (i/2)(λ²/4π)^ν Σ_k (−z²/4)^k / (k! Γ(k+ν+1))
        let nu = (d as f64 - 2.0) / 2.0;
        let q = z * z / 4.0;
        let mut term = 1.0 / gamma_half_int(nu + 1.0);
        let mut sum = term;
        for k in 1..40 {
            let kf = k as f64;
            term *= -q / (kf * (kf + nu));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        return I * 0.5 * (lambda * lambda / (4.0 * PI)).powf(nu) * sum;
    }
    match d {
        1 => I * (z.cos() / lambda),
        2 => I * 0.5 * specfun::j0(z),
        _ => {
            let k = free_kernel_unchecked(d, Sign::Plus, lambda, r);
            I * (2.0 * k.im)
        }
    }
}

/// `Γ(x)` for positive integers and half-integers.
fn gamma_half_int(x: f64) -> f64 {
    let mut g = if (x - x.round()).abs() < 0.25 { 1.0 } else { PI.sqrt() };
    let mut a = if (x - x.round()).abs() < 0.25 { 1.0 } else { 0.5 };
    while a < x - 0.25 {
        g *= a;
        a += 1.0;
    }
    g
}

/// Kernel minus its small-energy leading terms.
pub fn remainder(d: Dimension, sign: Sign, lambda: f64, r: f64) -> Result<Complex64> {
    check_lambda(lambda)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("remainder needs r > 0, got {r}")));
    }
    Ok(remainder_unchecked(d.0, sign, lambda, r))
}

pub(crate) fn remainder_unchecked(d: u32, sign: Sign, lambda: f64, r: f64) -> Complex64 {
    let s = sign.as_f64();
    let z = lambda * r;
    let v = match d {
        1 => {
            // (z − sin z)/(2λ) − i sin²(z/2)/λ
            let h = (z / 2.0).sin();
            Complex64::new(z_minus_sin(z) / (2.0 * lambda), -h * h / lambda)
        }
        2 => {
            let (j_m1, y_sub) = j0_y0_subtracted(z);
            Complex64::new(-0.25 * y_sub, 0.25 * j_m1)
        }
        _ => {
            // c_d r^{2−d} [e^{iz} Σ a_k (−2iz)^k − a_0]
            let p = odd_shifted_polynomial(d, z);
            odd_prefactor(d) * p / r.powi(d as i32 - 2)
        }
    };
    if s > 0.0 {
        v
    } else {
        v.conj()
    }
}

/// `z − sin z` without cancellation.
fn z_minus_sin(z: f64) -> f64 {
    if z.abs() < 0.5 {
        let z2 = z * z;
        let mut term = z * z2 / 6.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -z2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        z - z.sin()
    }
}

/// `(J₀(z) − 1, Y₀(z) − (2/π)(log(z/2) + γ))` without cancellation at small `z`.
fn j0_y0_subtracted(z: f64) -> (f64, f64) {
    let lead = (2.0 / PI) * ((z / 2.0).ln() + EULER_GAMMA);
    if z < 1.0 {
        let q = z * z / 4.0;
        let mut t = 1.0;
        let mut harmonic = 0.0;
        let mut jm1 = 0.0;
        let mut ys = 0.0;
        for k in 1..30 {
            let kf = k as f64;
            t *= -q / (kf * kf);
            harmonic += 1.0 / kf;
            jm1 += t;
            ys -= harmonic * t;
            if t.abs() < 1e-19 {
                break;
            }
        }
        (jm1, lead * jm1 + (2.0 / PI) * ys)
    } else {
        let (j, y) = specfun::jy_any(0, z);
        (j - 1.0, y - lead)
    }
}

/// `e^{iz} Σ_k a_k (−2iz)^k − a_0` for the odd-d closed form, Taylor-summed at small `z`.
fn odd_shifted_polynomial(d: u32, z: f64) -> Complex64 {
    let coef = odd_coefficients(d);
    if z < 0.5 {
        // coefficient of z^n: Σ_k a_k (−2i)^k i^{n−k}/(n−k)!
        let mut sum = Complex64::new(0.0, 0.0);
        let mut zn = 1.0;
        for n in 1..40usize {
            zn *= z;
            let mut c = Complex64::new(0.0, 0.0);
            for (k, &a) in coef.iter().enumerate() {
                if k > n {
                    break;
                }
                let m = n - k;
                let fact: f64 = (1..=m).map(|j| j as f64).product();
                c += a * Complex64::new(0.0, -2.0).powu(k as u32) * I.powu(m as u32) / fact;
            }
            let term = c * zn;
            sum += term;
            if n > coef.len() + 2 && term.norm() < 1e-19 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let w = Complex64::new(0.0, -2.0 * z);
        let mut p = Complex64::new(0.0, 0.0);
        let mut wk = Complex64::new(1.0, 0.0);
        for &c in &coef {
            p += c * wk;
            wk *= w;
        }
        Complex64::cis(z) * p - coef[0]
    }
}

/// `K^±(z) = R₀^±(1; z)`.
fn unit_kernel(d: u32, sign: Sign, z: f64) -> Complex64 {
    free_kernel_unchecked(d, sign, 1.0, z)
}

/// Amplitude factors of the oscillatory representations:
///
/// * `LargeArgPhi`: `R₀^± = λ^{(d−3)/2} r^{−(d−1)/2} e^{±iλr} Φ^±(λr)`, `λr > 1/2`;
/// * `AmplitudeW0`/`AmplitudeW1` (`d ≥ 3`): `R₀^± = λ^{(d−3)/2} e^{±iλr} w₀^±/r^{(d−1)/2} + e^{±iλr} w₁^±/r^{d−2}`,
///   split by `η(λr)`; for `d = 2`, `W0` is the `w^±` of `R₀^± = e^{±iλr} w^±(λr)` and `W1 ≡ 0`;
/// * `SpectralMeasureJ`: `R₀^+ − R₀^− = λ^{(d−3)/2} r^{−(d−1)/2} (e^{iλr} J^+ − e^{−iλr} J^−)`.
pub fn amplitude(part: KernelPart, d: Dimension, sign: Sign, z: f64) -> Result<Complex64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("amplitude needs z > 0, got {z}")));
    }
    let dd = d.0;
    let s = sign.as_f64();
    let half = (dd as f64 - 1.0) / 2.0;
    let eta = CutoffSpec::eta();
    let phi = |z: f64| unit_kernel(dd, sign, z) * z.powf(half) * Complex64::cis(-s * z);
    match part {
        KernelPart::LargeArgPhi => {
            if z <= 0.5 {
                return Err(Error::Domain(format!("Φ^± is defined for z > 1/2, got {z}")));
            }
            Ok(phi(z))
        }
        KernelPart::AmplitudeW0 => match dd {
            1 => Err(Error::Unsupported("w₀ amplitude in d = 1".into())),
            2 => Ok(unit_kernel(2, sign, z) * Complex64::cis(-s * z)),
            _ => Ok((1.0 - eta.value(z)) * phi(z)),
        },
        KernelPart::AmplitudeW1 => match dd {
            1 => Err(Error::Unsupported("w₁ amplitude in d = 1".into())),
            2 => Ok(Complex64::new(0.0, 0.0)),
            _ => Ok(eta.value(z)
                * unit_kernel(dd, sign, z)
                * z.powi(dd as i32 - 2)
                * Complex64::cis(-s * z)),
        },
        KernelPart::SpectralMeasureJ => {
            if dd == 1 || dd == 3 {
                return Ok(phi(z));
            }
            let e = eta.value(z);
            let dm = spectral_measure_unchecked(dd, 1.0, z);
            let regular = 0.5 * e * z.powf(half) * Complex64::cis(-s * z) * dm * s;
            let singular = if e < 1.0 { (1.0 - e) * phi(z) } else { Complex64::new(0.0, 0.0) };
            Ok(singular + regular)
        }
        _ => Err(Error::Unsupported(format!("{part:?} is not an amplitude"))),
    }
}

/// Dispatch by tag at `(λ, r)`; amplitudes are evaluated at `z = λr`.
pub fn kernel_part(part: KernelPart, d: Dimension, sign: Sign, lambda: f64, r: f64) -> Result<Complex64> {
    match part {
        KernelPart::Full => free_kernel(d, sign, lambda, r),
        KernelPart::Fundamental => fundamental_kernel(d, r).map(|v| Complex64::new(v, 0.0)),
        KernelPart::Remainder => remainder(d, sign, lambda, r),
        KernelPart::SpectralMeasureJ if r == 0.0 => spectral_measure_kernel(d, lambda, 0.0),
        _ => {
            check_lambda(lambda)?;
            amplitude(part, d, sign, lambda * r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{hankel, BesselOrder};

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn d1_at_origin() {
        let k = free_kernel(dim(1), Sign::Plus, 1.0, 0.0).unwrap();
        assert_eq!(k, Complex64::new(0.0, 0.5));
    }

    #[test]
    fn d3_single_term() {
        let k = free_kernel(dim(3), Sign::Plus, 2.0, 1.0).unwrap();
        let expect = Complex64::cis(2.0) / (4.0 * PI);
        assert!(close(k, expect, 1e-15));
        assert!((k.re + 0.03311591304426636).abs() < 1e-15 && (k.im - 0.07235959011002412).abs() < 1e-15);
    }

    #[test]
    fn odd_forms_match_hankel_of_order_d_minus_2_over_2() {
        for &d in &[3u32, 5, 7] {
            let order = BesselOrder::from_twice(d - 2).unwrap();
            let nu = (d as f64 - 2.0) / 2.0;
            for &(lambda, r) in &[(0.3, 0.7), (1.0, 1.0), (2.5, 4.0), (0.01, 30.0)] {
                let z = lambda * r;
                let h = hankel(Sign::Plus, order, z).unwrap();
                let via_hankel = I * 0.25 * (lambda / (2.0 * PI * r)).powf(nu) * h;
                let closed = free_kernel(dim(d), Sign::Plus, lambda, r).unwrap();
                assert!(close(closed, via_hankel, 1e-11), "d={d} λ={lambda} r={r}");
            }
        }
    }

    #[test]
    fn d5_and_d7_explicit() {
        let (l, r) = (0.8, 1.3);
        let z = l * r;
        let k5 = free_kernel(dim(5), Sign::Plus, l, r).unwrap();
        let e5 = Complex64::new(1.0, -z) * Complex64::cis(z) / (8.0 * PI * PI * r.powi(3));
        assert!(close(k5, e5, 1e-14));
        let k7 = free_kernel(dim(7), Sign::Plus, l, r).unwrap();
        let e7 = Complex64::new(3.0 - z * z, -3.0 * z) * Complex64::cis(z) / (16.0 * PI.powi(3) * r.powi(5));
        assert!(close(k7, e7, 1e-14));
    }

    #[test]
    fn d2_log_singularity() {
        let k = free_kernel(dim(2), Sign::Plus, 1.0, 1e-6).unwrap();
        // Re = −(1/2π) log r + (ln 2 − γ)/2π + O(r² log r)
        let shift = (2f64.ln() - crate::specfun::EULER_GAMMA) / (2.0 * PI);
        assert!((k.re + (1e-6f64).ln() / (2.0 * PI) - shift).abs() < 1e-10);
        assert!((k.re - 2.217257870414861).abs() < 1e-12);
        assert!((k.im - 0.25).abs() < 1e-12);
        assert!(free_kernel(dim(2), Sign::Plus, 1.0, 0.0).is_err());
        assert!(free_kernel(dim(3), Sign::Plus, 0.0, 1.0).is_err());
    }

    #[test]
    fn fundamental_values() {
        assert!((fundamental_kernel(dim(3), 1.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert_eq!(fundamental_kernel(dim(2), 1.0).unwrap(), 0.0);
        assert_eq!(fundamental_kernel(dim(1), 3.0).unwrap(), -1.5);
        assert!((fundamental_constant(5) - 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn spectral_measure_values() {
        assert_eq!(spectral_measure_kernel(dim(1), 1.0, 0.0).unwrap(), I);
        assert!(spectral_measure_kernel(dim(3), 1.0, PI).unwrap().norm() < 1e-16);
        for &d in &[2u32, 3, 5, 7] {
            for &(l, r) in &[(0.7, 0.3), (1.2, 2.0), (3.0, 5.0)] {
                let a = spectral_measure_kernel(dim(d), l, r).unwrap();
                let b = free_kernel(dim(d), Sign::Plus, l, r).unwrap()
                    - free_kernel(dim(d), Sign::Minus, l, r).unwrap();
                assert!((a - b).norm() < 1e-13 * b.norm().max(1e-3), "d={d}");
            }
            // continuous through the series switch and bounded at 0
            let l = 1.3;
            let a = spectral_measure_kernel(dim(d), l, 0.4999 / l).unwrap();
            let b = spectral_measure_kernel(dim(d), l, 0.5001 / l).unwrap();
            assert!((a - b).norm() < 1e-3 * a.norm());
            assert!(spectral_measure_kernel(dim(d), l, 0.0).unwrap().norm().is_finite());
        }
        let j2 = spectral_measure_kernel(dim(2), 1.5, 2.0).unwrap();
        assert!((j2 - I * 0.5 * crate::specfun::j0(3.0)).norm() < 1e-15);
    }

    #[test]
    fn remainder_definitions() {
        for &(l, r) in &[(0.2, 1.0), (0.9, 3.0), (1e-3, 2.0)] {
            for &sign in &[Sign::Plus, Sign::Minus] {
                let s = sign.as_f64();
                let k1 = free_kernel(dim(1), sign, l, r).unwrap();
                let lead1 = Complex64::new(-r / 2.0, s / (2.0 * l));
                assert!((remainder(dim(1), sign, l, r).unwrap() - (k1 - lead1)).norm() < 1e-12 / l);
                let k2 = free_kernel(dim(2), sign, l, r).unwrap();
                let lead2 = d2_constant(sign) - (l.ln() + r.ln()) / (2.0 * PI);
                assert!((remainder(dim(2), sign, l, r).unwrap() - (k2 - lead2)).norm() < 1e-12);
                for &d in &[3u32, 5, 7] {
                    let k = free_kernel(dim(d), sign, l, r).unwrap();
                    let lead = fundamental_constant(d) / r.powi(d as i32 - 2);
                    let rem = remainder(dim(d), sign, l, r).unwrap();
                    assert!((rem - (k - lead)).norm() < 1e-12, "d={d}");
                }
            }
        }
    }

    #[test]
    fn remainder_rates() {
        for &d in &[1u32, 2, 3, 5] {
            let lams: Vec<f64> = (0..13).map(|i| 1e-4 * 10f64.powf(i as f64 / 4.0)).collect();
            let ys: Vec<f64> = lams
                .iter()
                .map(|&l| remainder(dim(d), Sign::Plus, l, 1.0).unwrap().norm().ln())
                .collect();
            let xs: Vec<f64> = lams.iter().map(|l| l.ln()).collect();
            let fit = crate::fit::linear_fit(&xs, &ys);
            assert!(fit.slope >= 0.9, "d={d} slope {}", fit.slope);
        }
    }

    #[test]
    fn conjugation_symmetry_exact() {
        for &d in &[1u32, 2, 3, 5, 7] {
            for &(l, r) in &[(0.3, 0.2), (2.0, 7.0)] {
                let p = free_kernel(dim(d), Sign::Plus, l, r).unwrap();
                let m = free_kernel(dim(d), Sign::Minus, l, r).unwrap();
                assert_eq!(p.conj(), m);
            }
        }
    }

    #[test]
    fn amplitudes_reassemble() {
        for &d in &[2u32, 3, 5, 7] {
            for &sign in &[Sign::Plus, Sign::Minus] {
                let s = sign.as_f64();
                for &(l, r) in &[(0.5, 0.6), (1.5, 2.0), (0.9, 0.9), (4.0, 3.0)] {
                    let z = l * r;
                    let k = free_kernel(dim(d), sign, l, r).unwrap();
                    let half = (d as f64 - 1.0) / 2.0;
                    let pre = l.powf((d as f64 - 3.0) / 2.0) / r.powf(half);
                    if z > 0.5 {
                        let phi = amplitude(KernelPart::LargeArgPhi, dim(d), sign, z).unwrap();
                        assert!(close(pre * Complex64::cis(s * z) * phi, k, 1e-10));
                    }
                    if d >= 3 {
                        let w0 = amplitude(KernelPart::AmplitudeW0, dim(d), sign, z).unwrap();
                        let w1 = amplitude(KernelPart::AmplitudeW1, dim(d), sign, z).unwrap();
                        let re = pre * Complex64::cis(s * z) * w0
                            + Complex64::cis(s * z) * w1 / r.powi(d as i32 - 2);
                        assert!(close(re, k, 1e-10), "d={d} z={z}");
                    } else {
                        let w = amplitude(KernelPart::AmplitudeW0, dim(2), sign, z).unwrap();
                        assert!(close(Complex64::cis(s * z) * w, k, 1e-10));
                    }
                }
            }
            for &(l, r) in &[(0.2, 0.6), (1.5, 2.0), (0.9, 0.9), (4.0, 3.0)] {
                let z: f64 = l * r;
                let half = (d as f64 - 1.0) / 2.0;
                let pre = l.powf((d as f64 - 3.0) / 2.0) / r.powf(half);
                let jp = amplitude(KernelPart::SpectralMeasureJ, dim(d), Sign::Plus, z).unwrap();
                let jm = amplitude(KernelPart::SpectralMeasureJ, dim(d), Sign::Minus, z).unwrap();
                let re = pre * (Complex64::cis(z) * jp - Complex64::cis(-z) * jm);
                let dm = spectral_measure_kernel(dim(d), l, r).unwrap();
                assert!((re - dm).norm() < 1e-10 * dm.norm().max(1e-6), "d={d} z={z}");
            }
        }
    }

    #[test]
    fn amplitude_examples() {
        let p = amplitude(KernelPart::LargeArgPhi, dim(3), Sign::Plus, 7.3).unwrap();
        assert!((p - Complex64::new(1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
        for &z in &[0.1, 1.0, 10.0] {
            for &s in &[Sign::Plus, Sign::Minus] {
                let j = amplitude(KernelPart::SpectralMeasureJ, dim(1), s, z).unwrap();
                assert!((j.norm() - 0.5).abs() < 1e-15);
            }
        }
        assert!(amplitude(KernelPart::AmplitudeW0, dim(1), Sign::Plus, 1.0).is_err());
        assert!(amplitude(KernelPart::LargeArgPhi, dim(2), Sign::Plus, 0.4).is_err());
        assert!(amplitude(KernelPart::Full, dim(2), Sign::Plus, 1.0).is_err());
    }

    #[test]
    fn phi_derivative_bound_d2() {
        // finite-difference derivative times ⟨z⟩ stays bounded on [1, 10³]
        let mut worst: f64 = 0.0;
        for i in 0..=60 {
            let z = 10f64.powf(3.0 * i as f64 / 60.0);
            let h = 1e-4 * z;
            let f = |x: f64| amplitude(KernelPart::LargeArgPhi, dim(2), Sign::Plus, x).unwrap();
            let der = (f(z + h) - f(z - h)) / (2.0 * h);
            worst = worst.max(der.norm() * (1.0 + z * z).sqrt());
        }
        assert!(worst < 1.0, "sup |Φ'|⟨z⟩ = {worst}");
    }

    #[test]
    fn helmholtz_residual_d1() {
        // u(x) = ∫ K(|x−y|) f(y) dy; −u'' − λ²u = f for f(y) = e^{−y²}
        let lambda = 1.3;
        let f = |y: f64| (-y * y).exp();
        let u = |x: f64| {
            let rule = crate::quadrature::gauss::GaussLegendre::new(64);
            let g = |y: f64| free_kernel_unchecked(1, Sign::Plus, lambda, (x - y).abs()) * f(y);
            rule.integrate_complex(-9.0, x, &g) + rule.integrate_complex(x, 9.0, &g)
        };
        for &x in &[-0.7, 0.0, 0.4, 1.1] {
            let h = 1e-3;
            let lap = (u(x + h) - 2.0 * u(x) + u(x - h)) / (h * h);
            let res = -lap - lambda * lambda * u(x) - f(x);
            assert!(res.norm() < 1e-6, "x={x} residual {}", res.norm());
        }
    }
}
