use num_complex::Complex64;

use super::{Estimate, QuadConfig};
use crate::error::{Error, Result};
use crate::spectral::image::{paired_integral, KernelSpec};
use crate::spectral::PotentialProfile;
use crate::Sign;

/// Kernels accepted by [`singular_double_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelTag {
    FreeKernel(Sign),
    Fundamental,
    Log,
    Abs,
}

/// `∬ K(|x−y|) φ_i(y) φ_j(x) dy dx`.
///
/// The kernel is reduced to one-dimensional cumulative integrals (ordering in
/// d = 1, spherical means over radii in d ≥ 2), so the diagonal singularity
/// never meets a quadrature node; the error estimate compares two panel
/// widths. Profiles are truncated where they fall below `1e−16` of their scale.
pub fn singular_double_integral(
    tag: KernelTag,
    phi_i: &PotentialProfile,
    phi_j: &PotentialProfile,
    lambda: f64,
    cfg: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    let d = phi_i.dimension().get();
    let spec = match tag {
        KernelTag::FreeKernel(s) => KernelSpec::Free(s, lambda),
        KernelTag::Fundamental => KernelSpec::Fundamental,
        KernelTag::Log if d == 2 => KernelSpec::Fundamental,
        KernelTag::Abs if d == 1 => KernelSpec::Abs,
        _ => return Err(Error::Unsupported(format!("kernel {tag:?} in dimension {d}"))),
    };
    let (value, error) = paired_integral(phi_i, phi_j, spec)?;
    // the log tag is −2π times the d = 2 fundamental kernel
    let value = if tag == KernelTag::Log { value * (-2.0 * std::f64::consts::PI) } else { value };
    let error = if tag == KernelTag::Log { error * 2.0 * std::f64::consts::PI } else { error };
    if error > cfg.abs_tol.max(cfg.rel_tol * value.norm()) {
        return Err(Error::Quadrature { value: value.norm(), error });
    }
    Ok(Estimate { value, error, evaluations: 0 })
}
