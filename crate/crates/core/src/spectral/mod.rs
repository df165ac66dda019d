//! `F^±(λ²) = ⟨R₀^±(λ²)φ_i, φ_j⟩`, the matrices `A^± = I + Fᵀ` and
//! `G^± = (A^±)^{-1}`, the rank-one `G_+^α`, spectral-condition scans and
//! the low-energy expansion coefficients.

pub mod image;
mod profile;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{self, extrapolate_to_zero};
use crate::quadrature::{singular_double_integral, KernelTag, QuadConfig};
use crate::resolvent::{d2_constant, Dimension};
use crate::Sign;

pub use profile::{PotentialProfile, ProfileKind};

pub type CMatrix = DMatrix<Complex64>;

/// Threshold below which a profile mass counts as zero.
pub const MASS_EPS: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum ModelVariant {
    RankOne { alpha: f64, phi: PotentialProfile },
    FiniteRank { profiles: Vec<PotentialProfile> },
}

/// `H = −Δ + α⟨·, φ⟩φ` or `H = −Δ + Σ_j ⟨·, φ_j⟩φ_j` with orthonormal `φ_j`.
#[derive(Clone, Debug)]
pub struct PerturbationModel {
    pub variant: ModelVariant,
    d: Dimension,
    k0: usize,
    sigma: f64,
}

impl PerturbationModel {
    pub fn rank_one(alpha: f64, phi: PotentialProfile) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::Invalid(format!("coupling α must be ≥ 0, got {alpha}")));
        }
        let d = phi.dimension();
        let m = phi.mass();
        let k0 = usize::from(m.abs() > MASS_EPS);
        Ok(PerturbationModel { variant: ModelVariant::RankOne { alpha, phi }, d, k0, sigma: m.abs() })
    }

    pub fn finite_rank(d: Dimension, profiles: Vec<PotentialProfile>) -> Result<Self> {
        if profiles.iter().any(|p| p.dimension() != d) {
            return Err(Error::Invalid("profiles must share the model dimension".into()));
        }
        for i in 0..profiles.len() {
            for j in 0..=i {
                let g = profiles[i].inner(&profiles[j])?;
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - target).abs() > 1e-8 {
                    return Err(Error::Precondition(format!(
                        "profiles must be orthonormal: ⟨φ{i}, φ{j}⟩ = {g:.3e}"
                    )));
                }
            }
        }
        let masses: Vec<f64> = profiles.iter().map(|p| p.mass()).collect();
        let k0 = masses.iter().filter(|m| m.abs() > MASS_EPS).count();
        let sigma = masses.iter().map(|m| m * m).sum::<f64>().sqrt();
        Ok(PerturbationModel { variant: ModelVariant::FiniteRank { profiles }, d, k0, sigma })
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rank(&self) -> usize {
        match &self.variant {
            ModelVariant::RankOne { .. } => 1,
            ModelVariant::FiniteRank { profiles } => profiles.len(),
        }
    }

    pub fn profiles(&self) -> Vec<&PotentialProfile> {
        match &self.variant {
            ModelVariant::RankOne { phi, .. } => vec![phi],
            ModelVariant::FiniteRank { profiles } => profiles.iter().collect(),
        }
    }

    /// Coupling of each rank-one piece: `α`, or 1 in the finite-rank model.
    pub fn couplings(&self) -> Vec<f64> {
        match &self.variant {
            ModelVariant::RankOne { alpha, .. } => vec![*alpha],
            ModelVariant::FiniteRank { profiles } => vec![1.0; profiles.len()],
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        self.profiles().iter().map(|p| p.mass()).collect()
    }

    /// True when the perturbation vanishes identically.
    pub fn is_trivial(&self) -> bool {
        self.rank() == 0 || self.couplings().iter().all(|&c| c == 0.0)
    }
}

/// `f_ij(λ²) = ⟨R₀^±(λ²)φ_i, φ_j⟩`.
pub fn f_entry(
    phi_i: &PotentialProfile,
    phi_j: &PotentialProfile,
    sign: Sign,
    lambda: f64,
    quad: &QuadConfig,
) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ must be positive, got {lambda}")));
    }
    Ok(singular_double_integral(KernelTag::FreeKernel(sign), phi_i, phi_j, lambda, quad)?.value)
}

/// The matrix `(f_ij)`.
pub fn f_matrix(model: &PerturbationModel, sign: Sign, lambda: f64, quad: &QuadConfig) -> Result<CMatrix> {
    let ps = model.profiles();
    let n = ps.len();
    let mut f = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] = f_entry(ps[i], ps[j], sign, lambda, quad)?;
        }
    }
    Ok(f)
}

/// `a_ij = δ_ij + c_i f_ji` from a given `F` (couplings `c`, all 1 in the
/// finite-rank model).
pub fn build_a_from_f(f: &CMatrix, couplings: &[f64]) -> CMatrix {
    let n = f.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta, 0.0) + f[(j, i)] * couplings[i]
    })
}

/// `A^±(λ) = I_N + F^±_{N×N}(λ²)` with `a_ij = δ_ij + f_ji` (rank one: `1 + αF`).
pub fn build_a(model: &PerturbationModel, sign: Sign, lambda: f64, quad: &QuadConfig) -> Result<CMatrix> {
    let f = f_matrix(model, sign, lambda, quad)?;
    Ok(build_a_from_f(&f, &model.couplings()))
}

/// `G = A^{-1}`, rejecting near-singular `A`.
pub fn invert_g(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let lu = a.clone().lu();
    let det = lu.determinant().norm();
    if !(det > 1e-12) {
        return Err(Error::Conditioning(det));
    }
    let g = lu.try_inverse().ok_or(Error::Conditioning(det))?;
    let res = (&g * a - CMatrix::identity(n, n)).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if res > 1e-10 {
        return Err(Error::Conditioning(det));
    }
    Ok(g)
}

/// Matrix `Γ` of the stationary representation: `R^±Φ C = R₀^±Φ Γ`,
/// i.e. `Γ = A^{-1}` with couplings folded in (`α/(1+αF)` for rank one).
pub fn gamma_matrix(model: &PerturbationModel, sign: Sign, lambda: f64, quad: &QuadConfig) -> Result<CMatrix> {
    let c = model.couplings();
    let a = build_a(model, sign, lambda, quad)?;
    let det = a.clone().lu().determinant().norm();
    let g = invert_g(&a).map_err(|_| Error::ConditionViolation { lambda, det })?;
    // (I + C Fᵀ)^{-1} C
    Ok(CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * c[j]))
}

/// `G_+^α(λ) = α/(1 + αF^+(λ²))`.
pub fn g_alpha(model: &PerturbationModel, lambda: f64, quad: &QuadConfig) -> Result<Complex64> {
    let (alpha, phi) = match &model.variant {
        ModelVariant::RankOne { alpha, phi } => (*alpha, phi),
        _ => return Err(Error::Invalid("g_alpha needs a rank-one model".into())),
    };
    let f = f_entry(phi, phi, Sign::Plus, lambda, quad)?;
    g_alpha_from_f(alpha, f, lambda)
}

pub fn g_alpha_from_f(alpha: f64, f: Complex64, lambda: f64) -> Result<Complex64> {
    let den = 1.0 + alpha * f;
    if den.norm() <= 1e-12 {
        return Err(Error::ConditionViolation { lambda, det: den.norm() });
    }
    Ok(alpha / den)
}

/// Sampled `F^±`, `A^+`, `G^+` along a `λ` grid.
#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub lambdas: Vec<f64>,
    pub f_plus: Vec<CMatrix>,
    pub f_minus: Vec<CMatrix>,
    pub a_plus: Vec<CMatrix>,
    pub g_plus: Vec<Option<CMatrix>>,
    pub det_plus: Vec<Complex64>,
    pub det_margin: f64,
    pub c0_target: f64,
    pub passed: bool,
    pub failures: Vec<(f64, String)>,
    /// Log-log slope of `max|f_ij|` over `λ ≥ 1`, when the grid reaches there.
    pub tail_slope: Option<f64>,
}

impl SpectralCurve {
    /// Curve assembled from given `F^+` samples (`F^−` by conjugation).
    pub fn from_f(lambdas: Vec<f64>, f_plus: Vec<CMatrix>, couplings: &[f64], c0_target: f64) -> Self {
        let f_minus = f_plus.iter().map(|f| f.map(|v| v.conj())).collect();
        Self::assemble(lambdas, f_plus, f_minus, couplings, c0_target, Vec::new())
    }

    fn assemble(
        lambdas: Vec<f64>,
        f_plus: Vec<CMatrix>,
        f_minus: Vec<CMatrix>,
        couplings: &[f64],
        c0_target: f64,
        mut failures: Vec<(f64, String)>,
    ) -> Self {
        let mut a_plus = Vec::with_capacity(lambdas.len());
        let mut g_plus = Vec::with_capacity(lambdas.len());
        let mut det_plus = Vec::with_capacity(lambdas.len());
        for (l, f) in lambdas.iter().zip(&f_plus) {
            let a = build_a_from_f(f, couplings);
            let det = if a.nrows() == 0 { Complex64::new(1.0, 0.0) } else { a.clone().lu().determinant() };
            match invert_g(&a) {
                Ok(g) => g_plus.push(Some(g)),
                Err(e) => {
                    failures.push((*l, e.to_string()));
                    g_plus.push(None);
                }
            }
            det_plus.push(det);
            a_plus.push(a);
        }
        let det_margin = det_plus.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        let tail: Vec<(f64, f64)> = lambdas
            .iter()
            .zip(&f_plus)
            .filter(|(l, _)| **l >= 1.0)
            .map(|(l, f)| (*l, f.iter().map(|v| v.norm()).fold(0.0, f64::max)))
            .filter(|(_, m)| *m > 0.0)
            .collect();
        let tail_slope = if tail.len() >= 3 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = tail.into_iter().unzip();
            Some(fit::loglog_fit(&xs, &ys).slope)
        } else {
            None
        };
        let passed = det_margin >= c0_target && failures.is_empty();
        SpectralCurve {
            lambdas,
            f_plus,
            f_minus,
            a_plus,
            g_plus,
            det_plus,
            det_margin,
            c0_target,
            passed,
            failures,
            tail_slope,
        }
    }

    /// Per-λ flag `|det A^+| ≥ c₀`.
    pub fn margin_flags(&self) -> Vec<bool> {
        self.det_plus.iter().map(|d| d.norm() >= self.c0_target).collect()
    }
}

/// `F^±`, `A^+`, `G^+` and `min|det A^+|` over `lambdas`, evaluated in parallel.
/// Per-λ failures are recorded without aborting the scan.
pub fn spectral_condition_scan(
    model: &PerturbationModel,
    lambdas: &[f64],
    c0_target: f64,
    quad: &QuadConfig,
) -> Result<SpectralCurve> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Invalid("scan grid must be nonempty and positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("scan grid must be strictly increasing".into()));
    }
    if lambdas[0] > 0.1 || *lambdas.last().expect("nonempty") < 10.0 {
        return Err(Error::Precondition("scan grid must reach below λ = 0.1 and up to λ ≥ 10".into()));
    }
    let n = model.rank();
    let rows: Vec<(CMatrix, CMatrix, Option<String>)> = lambdas
        .par_iter()
        .map(|&l| {
            let fp = f_matrix(model, Sign::Plus, l, quad);
            let fm = f_matrix(model, Sign::Minus, l, quad);
            match (fp, fm) {
                (Ok(p), Ok(m)) => (p, m, None),
                (Err(e), _) | (_, Err(e)) => {
                    (CMatrix::from_element(n, n, Complex64::new(f64::NAN, f64::NAN)), CMatrix::zeros(n, n), Some(e.to_string()))
                }
            }
        })
        .collect();
    let mut failures = Vec::new();
    let mut fp = Vec::new();
    let mut fm = Vec::new();
    for (l, (p, m, e)) in lambdas.iter().zip(rows) {
        if let Some(e) = e {
            failures.push((*l, e));
        }
        fp.push(p);
        fm.push(m);
    }
    Ok(SpectralCurve::assemble(lambdas.to_vec(), fp, fm, &model.couplings(), c0_target, failures))
}

/// `a₀ = ⟨G₀φ, φ⟩` with `G₀ = c|x−y|^{2−d}` (odd d ≥ 3).
pub fn a0_coefficient(phi: &PotentialProfile, quad: &QuadConfig) -> Result<f64> {
    if phi.dimension().get() < 3 {
        return Err(Error::Unsupported("a₀ is defined for d ≥ 3".into()));
    }
    let v = singular_double_integral(KernelTag::Fundamental, phi, phi, 1.0, quad)?.value.re;
    if !(v > 0.0) {
        return Err(Error::NonConvergence(format!("a₀ = {v} is not positive")));
    }
    Ok(v)
}

/// `b₁ = ⟨G₀φ, φ⟩` with `G₀ = −|x−y|/2` (d = 1) or `−(1/2π) log|x−y|` (d = 2).
pub fn b1_coefficient(phi: &PotentialProfile, quad: &QuadConfig) -> Result<f64> {
    match phi.dimension().get() {
        1 | 2 => Ok(singular_double_integral(KernelTag::Fundamental, phi, phi, 1.0, quad)?.value.re),
        d => Err(Error::Unsupported(format!("b₁ in dimension {d}"))),
    }
}

/// Small-λ behaviour of the scalar channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Law {
    /// `F → a₀` (d ≥ 3, or zero mass in d = 1, 2).
    Constant,
    /// `F = (L/λ) + S + o(1)` with `L = ±(i/2)σ²` (d = 1).
    InverseLambda,
    /// `F = L·(−log λ/2π) + S + o(1)` with `L = σ²` (d = 2).
    LogLambda,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::Constant => "constant_d3",
            Law::InverseLambda => "inverse_lambda_d1",
            Law::LogLambda => "log_lambda_d2",
        }
    }

    fn for_model(d: u32, k0: usize) -> Law {
        match (d, k0 > 0) {
            (1, true) => Law::InverseLambda,
            (2, true) => Law::LogLambda,
            _ => Law::Constant,
        }
    }

    /// Leading part `L·b(λ)`.
    fn leading_term(self, leading: Complex64, lambda: f64) -> Complex64 {
        match self {
            Law::Constant => leading,
            Law::InverseLambda => leading / lambda,
            Law::LogLambda => leading * (-lambda.ln() / (2.0 * PI)),
        }
    }

    /// Leading plus secondary part.
    fn model(self, leading: Complex64, secondary: Complex64, lambda: f64) -> Complex64 {
        match self {
            // secondary is the coefficient of λ for the constant law
            Law::Constant => leading + secondary * lambda,
            _ => self.leading_term(leading, lambda) + secondary,
        }
    }
}

/// Extracted low-energy expansion of the scalar channel `F^±`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowEnergyFit {
    pub law: Law,
    pub leading: Complex64,
    pub secondary: Complex64,
    pub remainder_slope: f64,
    pub fit_r2: f64,
    pub accepted: bool,
    pub lambda0: f64,
    /// `L/2π` for the log law: the coefficient of `−log λ`.
    pub log_coefficient: Option<Complex64>,
}

impl LowEnergyFit {
    /// Leading plus secondary part of the fitted law at `λ`.
    pub fn value(&self, lambda: f64) -> Complex64 {
        self.law.model(self.leading, self.secondary, lambda)
    }
}

/// The scalar channel used by the low-energy analysis: `⟨R₀φ, φ⟩` for rank
/// one, and `f_11` of the ψ-rotated family in the finite-rank model.
pub fn scalar_channel(model: &PerturbationModel) -> Result<PotentialProfile> {
    match &model.variant {
        ModelVariant::RankOne { phi, .. } => Ok(phi.clone()),
        ModelVariant::FiniteRank { profiles } => {
            let m = orthonormalize_psi(model)?;
            match m.variant {
                ModelVariant::FiniteRank { profiles: ps } if !ps.is_empty() => Ok(ps[0].clone()),
                _ => profiles.first().cloned().ok_or_else(|| Error::Invalid("empty model".into())),
            }
        }
    }
}

/// Richardson ladder `λ_k = λ₀·2^{−k}`, `k = 4..=10`.
pub fn richardson_ladder(lambda0: f64) -> Vec<f64> {
    (4..=10).map(|k| lambda0 * 0.5f64.powi(k)).collect()
}

fn extract_coefficients(
    law: Law,
    phi: &PotentialProfile,
    sign: Sign,
    lambda0: f64,
    quad: &QuadConfig,
) -> Result<(Complex64, Complex64)> {
    let ladder = richardson_ladder(lambda0);
    let fs: Vec<Complex64> =
        ladder.iter().map(|&l| f_entry(phi, phi, sign, l, quad)).collect::<Result<Vec<_>>>()?;
    match law {
        Law::InverseLambda => {
            let q: Vec<Complex64> = ladder.iter().zip(&fs).map(|(l, f)| f * *l).collect();
            let (leading, _) = extrapolate_to_zero(&ladder, &q);
            let s: Vec<Complex64> = ladder.iter().zip(&fs).map(|(l, f)| f - leading / *l).collect();
            let (secondary, _) = extrapolate_to_zero(&ladder, &s);
            Ok((leading, secondary))
        }
        Law::LogLambda => {
            let ell: Vec<f64> = ladder.iter().map(|l| -l.ln() / (2.0 * PI)).collect();
            let slopes: Vec<Complex64> =
                (0..fs.len() - 1).map(|k| (fs[k] - fs[k + 1]) / (ell[k] - ell[k + 1])).collect();
            let h: Vec<f64> = ladder[..fs.len() - 1].iter().map(|l| l * l).collect();
            let (leading, _) = extrapolate_to_zero(&h[h.len() - 3..], &slopes[slopes.len() - 3..]);
            let s: Vec<Complex64> = fs.iter().zip(&ell).map(|(f, e)| f - leading * *e).collect();
            let h2: Vec<f64> = ladder.iter().map(|l| l * l).collect();
            let (secondary, _) = extrapolate_to_zero(&h2[h2.len() - 3..], &s[s.len() - 3..]);
            Ok((leading, secondary))
        }
        Law::Constant => {
            let (leading, _) = extrapolate_to_zero(&ladder, &fs);
            let s: Vec<Complex64> = ladder.iter().zip(&fs).map(|(l, f)| (f - leading) / *l).collect();
            let (secondary, _) = extrapolate_to_zero(&ladder, &s);
            Ok((leading, secondary))
        }
    }
}

/// `λ₀`: start at 0.1 and halve (at most six times) until the remainder is
/// below 0.2 of the leading term across the Richardson ladder.
pub fn select_lambda0(model: &PerturbationModel, sign: Sign, quad: &QuadConfig) -> Result<f64> {
    let phi = scalar_channel(model)?;
    let law = Law::for_model(model.dimension().get(), model.k0());
    let mut lambda0 = 0.1;
    for _ in 0..=6 {
        let (leading, secondary) = extract_coefficients(law, &phi, sign, lambda0, quad)?;
        let mut ok = true;
        for l in richardson_ladder(lambda0).into_iter().chain([lambda0]) {
            let f = f_entry(&phi, &phi, sign, l, quad)?;
            let lead = law.leading_term(leading, l);
            let rem = f - law.model(leading, secondary, l);
            if rem.norm() >= 0.2 * lead.norm() {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(lambda0);
        }
        lambda0 *= 0.5;
    }
    Ok(lambda0 * 2.0)
}

/// Leading and secondary coefficients plus the measured remainder slope on
/// `lambdas ⊂ (0, λ₀]`.
pub fn low_energy_fit(
    model: &PerturbationModel,
    sign: Sign,
    lambdas: &[f64],
    quad: &QuadConfig,
) -> Result<LowEnergyFit> {
    let lambda0 = lambdas.iter().copied().fold(0.0, f64::max);
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    if lambdas.len() < 3 || lambda0 / lo < 99.999 {
        return Err(Error::Precondition("fit grid must span at least two decades".into()));
    }
    let phi = scalar_channel(model)?;
    let law = Law::for_model(model.dimension().get(), model.k0());
    let (leading, secondary) = extract_coefficients(law, &phi, sign, lambda0, quad)?;
    let rems: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| f_entry(&phi, &phi, sign, l, quad).map(|f| (f - law.model(leading, secondary, l)).norm()))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit::loglog_fit(lambdas, &rems);
    let log_coefficient = (law == Law::LogLambda).then(|| leading / (2.0 * PI));
    Ok(LowEnergyFit {
        law,
        leading,
        secondary,
        remainder_slope: fit.slope,
        fit_r2: fit.r2,
        accepted: fit.r2 > 0.98,
        lambda0,
        log_coefficient,
    })
}

/// Rotate an orthonormal family so that only `ψ₁ = σ^{-1}Σ(∫φ_j)φ_j` has
/// nonzero mass. The rotation is the Householder reflection taking `e₁` to
/// `m/σ`, which preserves the projection `P`.
pub fn orthonormalize_psi(model: &PerturbationModel) -> Result<PerturbationModel> {
    let profiles = match &model.variant {
        ModelVariant::FiniteRank { profiles } => profiles,
        ModelVariant::RankOne { .. } => return Ok(model.clone()),
    };
    let sigma = model.sigma();
    if sigma <= MASS_EPS || profiles.is_empty() {
        let mut m = model.clone();
        m.k0 = 0;
        return Ok(m);
    }
    let n = profiles.len();
    let u: Vec<f64> = profiles.iter().map(|p| p.mass() / sigma).collect();
    let mut v: Vec<f64> = u.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = |i: usize, j: usize| -> f64 {
        let delta = if i == j { 1.0 } else { 0.0 };
        if vn < 1e-14 {
            delta
        } else {
            delta - 2.0 * v[i] * v[j] / (vn * vn)
        }
    };
    if vn < 1e-14 {
        return PerturbationModel::finite_rank(model.dimension(), profiles.clone());
    }
    let mut psis = Vec::with_capacity(n);
    for i in 0..n {
        let terms: Vec<(f64, PotentialProfile)> = (0..n)
            .filter(|&j| h(i, j) != 0.0)
            .map(|j| (h(i, j), profiles[j].clone()))
            .collect();
        psis.push(PotentialProfile::combination(terms)?);
    }
    PerturbationModel::finite_rank(model.dimension(), psis)
}

/// Extracted `lim g₁₁^+(λ)/λ` (d = 1) or `lim g₁₁^+(λ)·log λ` (d = 2).
#[derive(Clone, Debug, PartialEq)]
pub struct GLeading {
    pub value: Complex64,
    pub closed_form: Complex64,
    pub error: f64,
    /// `max_j≠1 |g₁ⱼ^+(λ)|` along the ladder, largest λ first.
    pub off_diagonal: Vec<f64>,
    pub lambdas: Vec<f64>,
}

/// Leading coefficient of `g₁₁^±` after ψ-normalization, extracted along the
/// Richardson ladder and compared against `∓2i(∫ψ₁)^{−2}` (d = 1) or
/// `−2π(∫ψ₁)^{−2}` (d = 2).
pub fn g11_leading(model: &PerturbationModel, sign: Sign, lambda0: f64, quad: &QuadConfig) -> Result<GLeading> {
    let d = model.dimension().get();
    if d > 2 {
        return Err(Error::Unsupported("g₁₁ leading coefficient outside d ∈ {1, 2}".into()));
    }
    let rotated = match &model.variant {
        ModelVariant::RankOne { phi, .. } => PerturbationModel::finite_rank(model.dimension(), vec![phi.clone()])?,
        ModelVariant::FiniteRank { .. } => orthonormalize_psi(model)?,
    };
    if rotated.k0() != 1 {
        return Err(Error::Precondition("g₁₁ leading coefficient needs k₀ = 1".into()));
    }
    let m1 = rotated.masses()[0];
    let ladder = richardson_ladder(lambda0);
    let gs: Vec<CMatrix> = ladder
        .par_iter()
        .map(|&l| invert_g(&build_a(&rotated, sign, l, quad)?))
        .collect::<Result<Vec<_>>>()?;
    let (h, q): (Vec<f64>, Vec<Complex64>) = match d {
        1 => (ladder.clone(), ladder.iter().zip(&gs).map(|(l, g)| g[(0, 0)] / *l).collect()),
        _ => (
            ladder.iter().map(|l| 1.0 / l.ln()).collect(),
            ladder.iter().zip(&gs).map(|(l, g)| g[(0, 0)] * l.ln()).collect(),
        ),
    };
    let (value, last) = extrapolate_to_zero(&h, &q);
    let (prev, _) = extrapolate_to_zero(&h[..h.len() - 1], &q[..q.len() - 1]);
    let error = last.max((value - prev).norm());
    if !value.is_finite() || error > 0.05 * value.norm() {
        return Err(Error::NonConvergence(format!("g₁₁ ladder not Cauchy: {q:?}")));
    }
    let closed_form = match d {
        1 => Complex64::new(0.0, -2.0 * sign.as_f64()) / (m1 * m1),
        _ => Complex64::new(-2.0 * PI / (m1 * m1), 0.0),
    };
    let off_diagonal = gs
        .iter()
        .map(|g| (1..g.ncols()).map(|j| g[(0, j)].norm()).fold(0.0, f64::max))
        .collect();
    Ok(GLeading { value, closed_form, error, off_diagonal, lambdas: ladder })
}

/// Outcome of the high-energy decay check.
#[derive(Clone, Debug, PartialEq)]
pub struct HighEnergyReport {
    pub f_slope: f64,
    pub dg_slope: f64,
    pub passed: bool,
}

/// Fitted slopes of `log max|f_ij|` and `log max|∂_λ g_ij|` over `λ ≥ 1`;
/// both must be ≤ −0.8.
pub fn high_energy_decay_check(curve: &SpectralCurve) -> Result<HighEnergyReport> {
    let idx: Vec<usize> = (0..curve.lambdas.len()).filter(|&k| curve.lambdas[k] >= 1.0).collect();
    if idx.len() < 5 || curve.lambdas[*idx.last().expect("nonempty")] < 50.0 {
        return Err(Error::Precondition("curve must cover λ ∈ [1, 50] with ≥ 5 samples".into()));
    }
    let ls: Vec<f64> = idx.iter().map(|&k| curve.lambdas[k]).collect();
    let fmax: Vec<f64> =
        idx.iter().map(|&k| curve.f_plus[k].iter().map(|v| v.norm()).fold(0.0, f64::max)).collect();
    let f_slope = slope_or_flat(&ls, &fmax);
    let mut dl = Vec::new();
    let mut dg = Vec::new();
    for w in idx.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if let (Some(ga), Some(gc)) = (&curve.g_plus[a], &curve.g_plus[c]) {
            let h = curve.lambdas[c] - curve.lambdas[a];
            let d = (gc - ga).map(|v| v / h);
            dl.push(curve.lambdas[b]);
            dg.push(d.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }
    let dg_slope = slope_or_flat(&dl, &dg);
    Ok(HighEnergyReport { f_slope, dg_slope, passed: f_slope <= -0.8 && dg_slope <= -0.8 })
}

/// Log-log slope, or −∞ when the data vanish identically (nothing to decay).
fn slope_or_flat(xs: &[f64], ys: &[f64]) -> f64 {
    if ys.iter().all(|&y| y < 1e-300) {
        return f64::NEG_INFINITY;
    }
    let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).filter(|(_, y)| *y > 0.0).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    fit::loglog_fit(&x, &y).slope
}

/// Leading d = 2 constant term of `F^±` for mass `m`: `(c^± − (1/2π) log λ) m²`.
pub fn d2_leading(sign: Sign, lambda: f64, mass: f64) -> Complex64 {
    (d2_constant(sign) - lambda.ln() / (2.0 * PI)) * (mass * mass)
}
