use thiserror::Error;

use crate::perturbation::PerturbationCheck;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("operator dimensions must be positive (got {rows}x{cols})")]
    EmptyOperator { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("reduced minimum modulus is undefined for the zero operator")]
    ZeroOperator,

    #[error("singular linear system (pivot {pivot:e} at step {step})")]
    SingularSystem { step: usize, pivot: f64 },

    #[error("SVD did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("subspaces live in different ambient spaces ({left} vs {right})")]
    AmbientMismatch { left: usize, right: usize },

    #[error("invalid rank {rank} for a {rows}x{cols} operator")]
    InvalidRank { rank: usize, rows: usize, cols: usize },

    #[error("invalid instance configuration: {0}")]
    InvalidConfig(String),

    #[error("perturbation is not admissible: {0:?}")]
    Inadmissible(Box<PerturbationCheck>),

    #[error("Neumann series did not reach tolerance in {terms} terms (last term norm {last_term_norm:e})")]
    SeriesNotConverged { terms: usize, last_term_norm: f64 },

    #[error("multiplier violates |phi| >= 1 at x = {x} (phi = {value})")]
    MultiplierTooSmall { x: f64, value: f64 },

    #[error("truncation family `{0}` has no analytic pseudoinverse action")]
    NoAnalyticAction(String),

    #[error("probe kind does not match family `{0}`")]
    ProbeMismatch(String),
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
