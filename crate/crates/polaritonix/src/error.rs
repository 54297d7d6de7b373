use thiserror::Error;

/// Failures raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("molecules {0} and {1} sit at the same position")]
    CoincidentPositions(usize, usize),

    #[error("coupling vector has zero norm")]
    ZeroCoupling,

    #[error("could not place molecule {index} after {attempts} attempts at minimum separation {min_separation}")]
    Placement {
        index: usize,
        attempts: usize,
        min_separation: f64,
    },

    #[error("matrix dimension {dim} exceeds the dense eigensolver cap {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("linear system is singular or numerically unusable")]
    Singular,

    #[error("truncation tolerance {tol} keeps only {captured:.3} of the vibronic weight")]
    Truncation { tol: f64, captured: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("time grid must be uniform and strictly increasing")]
    NonUniformGrid,

    #[error("step control underflowed at {substeps} substeps per interval")]
    StepUnderflow { substeps: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for solver breakdowns, false for rejected inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::CoincidentPositions(..)
                | Error::ZeroCoupling
                | Error::NonUniformGrid
                | Error::DenseCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
