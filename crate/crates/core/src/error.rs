use thiserror::Error;

use crate::tensor::SymmetryReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension n = {0} is not supported (need n >= 3)")]
    DimensionTooSmall(usize),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("metric determinant is {0} (expected 1)")]
    DeterminantNotOne(f64),

    #[error("matrix is ill-conditioned (eigenvalue {0:.3e} below floor)")]
    IllConditioned(f64),

    #[error("matrix is singular or too badly conditioned to invert")]
    Singular,

    #[error("perturbation is not tangent: g-trace {0:.3e}")]
    NotTangent(f64),

    #[error("tangent vector is attached to a different base metric")]
    BaseMismatch,

    #[error("degenerate plane: Gram determinant {gram:.3e} below {floor:.3e}")]
    DegeneratePlane { gram: f64, floor: f64 },

    #[error("tensor violates curvature symmetries (antisym {:.3e}, pair {:.3e}, bianchi {:.3e})",
        .0.max_antisym_violation, .0.max_pair_violation, .0.max_bianchi_violation)]
    SymmetryViolation(SymmetryReport),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixture generation failed: {0}")]
    Fixture(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
