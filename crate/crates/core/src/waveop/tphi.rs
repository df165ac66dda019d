//! The d = 2 operator `T_φ f = φ * T₀(φ * f)` with the centered kernel
//! `T₀(x, y) = −(1/4π²)[PV 1/(|x|² − |y|²) − iπ δ(|x|² − |y|²)]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::assembly::{assemble, Coupling, FieldSource};
use super::field::{Grid, NormReport, SampledField};
use super::{Piece, WaveOpConfig};
use crate::error::{Error, Result};
use crate::quadrature::gauss::{adaptive, GaussLegendre};
use crate::quadrature::{principal_value, sphere_average, QuadConfig};
use crate::spectral::{PerturbationModel, PotentialProfile, ProfileKind};
use crate::specfun::bessel_i0_scaled;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `PV ∫_{ℝ²} g(|y|)/(r² − |y|²) dy` and `∫_{ℝ²} δ(r² − |y|²) g(|y|) dy` for a
/// radial `g` supported in `|y| ≤ support`.
pub fn centered_parts<G: Fn(f64) -> f64>(g: G, support: f64, r: f64, quad: &QuadConfig) -> Result<(f64, f64)> {
    if !(r > 0.0 && support > 0.0) {
        return Err(Error::Domain(format!("need r > 0 and a positive support, got r = {r}, support = {support}")));
    }
    let radial = |rho: f64| 2.0 * PI * rho * g(rho) / (r * r - rho * rho);
    let tol = 1e-2 * quad.abs_tol;
    let pv = if r < support {
        let below = principal_value(&radial, r, 0.0, (2.0 * r).min(support), quad)?;
        let rest = if 2.0 * r < support {
            adaptive(&radial, 2.0 * r, support, &[], tol, 1e-3 * quad.rel_tol, quad.max_panels).value
        } else {
            0.0
        };
        below.value + rest
    } else if r > support {
        adaptive(&radial, 0.0, support, &[], tol, 1e-3 * quad.rel_tol, quad.max_panels).value
    } else {
        return Err(Error::Domain(format!("r = {r} sits on the support edge")));
    };
    // δ(r² − |y|²) = δ(|y| − r)/(2r)
    let delta = sphere_average(|y| g((y[0] * y[0] + y[1] * y[1]).sqrt()), r, quad)?.value;
    Ok((pv, delta))
}

/// `A(ρ, r) = ∫₀^{2π} φ(|ρe₀ − r e_θ|) dθ`.
struct AngularKernel<'a> {
    phi: &'a PotentialProfile,
    reach: f64,
    gaussian_width: Option<f64>,
    rule: &'static GaussLegendre,
}

impl<'a> AngularKernel<'a> {
    fn new(phi: &'a PotentialProfile) -> Self {
        let gaussian_width = (phi.kind() == ProfileKind::Gaussian).then(|| phi.scale_length());
        AngularKernel { phi, reach: phi.support_radius(), gaussian_width, rule: GaussLegendre::cached(64) }
    }

    fn eval(&self, rho: f64, r: f64) -> f64 {
        if (rho - r).abs() >= self.reach {
            return 0.0;
        }
        if let Some(w) = self.gaussian_width {
            let q = rho * r / (w * w);
            return 2.0 * PI * self.phi.eval(0.0) * (-0.5 * ((rho - r) / w).powi(2)).exp() * bessel_i0_scaled(q);
        }
        let c = ((rho * rho + r * r - self.reach * self.reach) / (2.0 * rho * r)).clamp(-1.0, 1.0);
        let top = c.acos();
        let dist = |t: f64| (rho * rho + r * r - 2.0 * rho * r * t.cos()).max(0.0).sqrt();
        2.0 * self.rule.integrate(0.0, top, |t| self.phi.eval(dist(t)))
    }
}

/// `(φ * f)(r_k)` on a radial midpoint grid, `φ` radial.
fn radial_convolve(phi: &PotentialProfile, values: &[Complex64], h: f64) -> Vec<Complex64> {
    let kernel = AngularKernel::new(phi);
    let n = values.len();
    let band = (kernel.reach / h).ceil() as usize + 1;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let r = (k as f64 + 0.5) * h;
            let lo = k.saturating_sub(band);
            let hi = (k + band + 1).min(n);
            let mut s = ZERO;
            for m in lo..hi {
                let rho = (m as f64 + 0.5) * h;
                let a = kernel.eval(rho, r);
                if a != 0.0 {
                    s += values[m] * (a * rho * h);
                }
            }
            s
        })
        .collect()
}

/// `P(r) = π PV∫_ℝ sgn(ρ) g(|ρ|)/(r − ρ) dρ` on the midpoint grid, by the
/// alternating-parity rule `Σ_{i−j odd} 2G_j/(i−j)` evaluated as an FFT convolution.
fn radial_pv(g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    // G_j at ρ = (j − n + ½)h, j = 0..2n
    let m = 2 * n;
    let mut big: Vec<Complex64> = (0..m)
        .map(|j| if j < n { -g[n - 1 - j] } else { g[j - n] })
        .collect();
    let size = (2 * m).next_power_of_two();
    big.resize(size, ZERO);
    // c(d) = 2/d for odd d, d = i − j ∈ (−m, m)
    let mut ker = vec![ZERO; size];
    for d in 1..m {
        if d % 2 == 1 {
            let c = 2.0 / d as f64;
            ker[d] = Complex64::new(c, 0.0);
            ker[size - d] = Complex64::new(-c, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut big);
    fwd.process(&mut ker);
    for (b, k) in big.iter_mut().zip(&ker) {
        *b *= k;
    }
    inv.process(&mut big);
    let norm = PI / size as f64;
    (n..m).map(|i| big[i] * norm).collect()
}

/// `T₀g` for radial `g` sampled on the midpoint grid.
fn centered_apply(g: &[Complex64]) -> Vec<Complex64> {
    let p = radial_pv(g);
    let c = -1.0 / (4.0 * PI * PI);
    p.iter()
        .zip(g)
        .map(|(pv, gv)| (pv - Complex64::new(0.0, PI * PI) * gv) * c)
        .collect()
}

fn check_radial_d2(phi: &PotentialProfile, f: &SampledField) -> Result<f64> {
    if phi.dimension().get() != 2 || f.dimension.get() != 2 {
        return Err(Error::Precondition("T_φ is the two-dimensional operator".into()));
    }
    match f.grid {
        Grid::Radial { spacing, .. } => Ok(spacing),
        _ => Err(Error::Unsupported("T_φ acts on radial samples".into())),
    }
}

/// `T_φ f = φ * T₀(φ * f)` for radial `f` on a radial grid.
pub fn tphi_apply(phi: &PotentialProfile, f: &SampledField) -> Result<SampledField> {
    let h = check_radial_d2(phi, f)?;
    let g = radial_convolve(phi, &f.values, h);
    let t = centered_apply(&g);
    f.with_values(radial_convolve(phi, &t, h))
}

/// `T_φ f` from the stationary formula with unit coupling, `(1/πi)∫₀^∞ λ u(λ, ·) v(λ) dλ`.
pub fn tphi_stationary(phi: &PotentialProfile, f: &SampledField, quad: &QuadConfig) -> Result<SampledField> {
    check_radial_d2(phi, f)?;
    let mut cfg = WaveOpConfig::new(PerturbationModel::rank_one(1.0, phi.clone())?, 1.0)?;
    cfg.quad = quad.clone();
    let src = FieldSource::new(f)?;
    let a = assemble(&cfg, &src, &f.grid.coordinates()?, &[Piece::Full], Coupling::Unit)?;
    f.with_values(a.values.into_iter().next().expect("piece"))
}

/// `‖T_φ f_s‖₁/‖f_s‖₁` and the weak-L¹ ratio for `f_s(x) = e^{−|x|²/2s²}/(2πs²)`
/// on one radial grid; `family_parameter` is `s`.
pub fn tphi_dilation_family(phi: &PotentialProfile, scales: &[f64], grid: Grid) -> Result<Vec<NormReport>> {
    let d2 = phi.dimension();
    let (h, len) = match grid {
        Grid::Radial { spacing, len } => (spacing, len),
        _ => return Err(Error::Unsupported("the dilation family lives on a radial grid".into())),
    };
    let radius = h * len as f64;
    scales
        .iter()
        .map(|&sc| {
            if !(sc > 0.0 && 8.0 * sc < radius && sc >= 2.0 * h) {
                return Err(Error::Invalid(format!("scale {sc} is not resolved on the grid [0, {radius}] with spacing {h}")));
            }
            let norm = 1.0 / (2.0 * PI * sc * sc);
            let f = SampledField::from_fn(d2, grid, |x| Complex64::new(norm * (-0.5 * (x[0] / sc).powi(2)).exp(), 0.0))?;
            let out = tphi_apply(phi, &f)?;
            NormReport::measure(&out, &f, 1.0, sc)
        })
        .collect()
}
