use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("order out of range: 2ν = {0} (supported 0..=7)")]
    OrderRange(i32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel singular at r = 0 in dimension {0}")]
    Singularity(u32),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quadrature failed: estimate {value} with error {error:.3e} above tolerance")]
    Quadrature { value: f64, error: f64 },

    #[error("principal value diverges: excision sequence {0:?} is not Cauchy")]
    PvDivergence(Vec<f64>),

    #[error("spectral condition violated at λ = {lambda}: |det A| = {det:.3e}")]
    ConditionViolation { lambda: f64, det: f64 },

    #[error("matrix near-singular: |det| = {0:.3e}")]
    Conditioning(f64),

    #[error("extrapolation did not converge: {0}")]
    NonConvergence(String),

    #[error("profile tails leak across the box boundary: |φ| = {0:.3e} at the edge")]
    BoundaryLeakage(f64),

    #[error("free evolution wraps around the box: v_max·T = {reach:.3} exceeds {limit:.3}")]
    WrapAround { reach: f64, limit: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of the numerical machinery, as opposed to rejected inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::PvDivergence(_)
                | Error::ConditionViolation { .. }
                | Error::Conditioning(_)
                | Error::NonConvergence(_)
        )
    }
}
