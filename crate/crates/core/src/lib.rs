//! Wave operators for finite-rank perturbations of the Laplacian.
//!
//! The crate is layered bottom-up:
//!
//! * [`specfun`]: Bessel and Hankel functions of integer and half-integer order.
//! * [`resolvent`]: free resolvent kernels, their leading parts and remainders, smooth cutoffs.
//! * [`quadrature`]: oscillatory, principal-value, sphere and singular double integrals.
//! * [`spectral`]: potential profiles, `F^±`, `A^±`, `G^±` and low-energy expansions.
//! * [`waveop`]: stationary assembly of `W_-`, its low/high split and the L¹ dichotomy probes.
//! * [`oracle`]: periodic-box discretization with exact finite-rank time evolution.

pub mod error;
pub mod fit;
pub mod jet;
pub mod oracle;
pub mod quadrature;
pub mod resolvent;
pub mod specfun;
pub mod spectral;
pub mod waveop;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Boundary-value side of the limiting absorption principle, `λ² ± i0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn parse(s: &str) -> Option<Sign> {
        match s {
            "+" | "plus" => Some(Sign::Plus),
            "-" | "minus" => Some(Sign::Minus),
            _ => None,
        }
    }
}
