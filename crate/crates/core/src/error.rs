use thiserror::Error;

/// Errors raised by the integrators and their building blocks.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type
/// the failing computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("singular matrix (pivot magnitude {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("projection directions and discrete gradients are not complementary (pivot magnitude {pivot:e})")]
    ComplementarityFailure { pivot: f64 },

    #[error("nonlinear solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("degenerate denominator {value:e} in skew-symmetric update")]
    DegenerateDenominator { value: f64 },

    #[error("vector field singular at radius {radius:e}")]
    Singularity { radius: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::SingularMatrix { .. } => "singular_matrix",
            Error::ComplementarityFailure { .. } => "complementarity_failure",
            Error::SolverDiverged { .. } => "solver_diverged",
            Error::DegenerateDenominator { .. } => "degenerate_denominator",
            Error::Singularity { .. } => "singularity",
            Error::Domain(_) => "domain",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
