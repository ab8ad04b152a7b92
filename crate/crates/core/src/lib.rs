//! Moore-Penrose pseudoinverses of finite-dimensional operators.
//!
//! Operators are dense, diagonal, or direct sums of operators over `ℂ`. The
//! pseudoinverse is computed from a Jacobi SVD and, independently, from its
//! definition on `R(T) ⊕ R(T)⊥`. On top of that sit the direct-sum algebra,
//! a perturbation update, truncations of unbounded diagonal and
//! multiplication operators, and a seeded catalog of identities checked as
//! numerical residuals.

pub mod algebra;
pub mod error;
pub mod identities;
pub mod matrix;
pub mod operator;
pub mod perturbation;
pub mod pinv;
pub mod svd;
pub mod truncation;

pub use error::{Error, Result};
pub use identities::{registry, run_suite, IdentityReport, InstanceConfig, SuiteOutcome};
pub use matrix::{normalized_residual, Matrix, C64};
pub use operator::{direct_sum, direct_sum_n, Operator, Vector};
pub use perturbation::{check_conditions, neumann_perturbed_pinv, perturbed_pinv, PerturbationCheck};
pub use pinv::{pinv, pinv_by_definition, PinvResult, Subspace, SUBSPACE_TOL};
pub use svd::{svd, SvdFactors};
pub use truncation::{convergence_study, ConvergenceRecord, Probe, TruncationFamily};
