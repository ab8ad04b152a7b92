//! Pseudoinverse of a perturbed operator `T + S` from `T†` alone.
//!
//! When `N(T) ⊆ N(S)`, `R(S) ⊆ R(T)` and `‖T†S‖ < 1`, the update
//! `(T + S)† = (I + T†S)⁻¹ T†` holds. The bound constants of the two
//! majorization conditions `‖Sx‖ ≤ b‖Tx‖` and `‖S*x‖ ≤ c‖T*x‖` are not inputs:
//! once the inclusions hold, the least admissible values are `b = ‖ST†‖` and
//! `c = ‖T†S‖`, which is what [`check_conditions`] reports.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::Operator;
use crate::pinv::{operator_norm, pinv_matrix, subspace_leq, Decomposition, SUBSPACE_TOL};

/// Norms within this distance below 1 are admissible but flagged.
pub const MARGINAL_BAND: f64 = 1e-8;

/// Rank cut for `T` and `S`, relative to the largest singular value. The
/// default cut sits a few ulps above rounding noise, and a rank-deficient
/// operator assembled from factors can leave its zero singular values just
/// above it; a spurious tiny direction in `N(T)⊥` would break both inclusions.
pub const RANK_RTOL: f64 = 1e-10;

fn decompose(op: &Operator) -> Result<Decomposition> {
    let mut d = Decomposition::of(op, None)?;
    d.tol = d.tol.max(RANK_RTOL * d.factors.largest());
    d.rank = d.factors.rank(d.tol);
    Ok(d)
}

fn rank_tol(op: &Operator) -> Result<f64> {
    Ok(decompose(op)?.tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationCheck {
    /// `‖T†S‖`, also the least constant `c` in `‖S*x‖ ≤ c‖T*x‖`.
    pub t_dagger_s_norm: f64,
    /// `‖ST†‖`, the least constant `b` in `‖Sx‖ ≤ b‖Tx‖`.
    pub s_t_dagger_norm: f64,
    /// `N(T) ⊆ N(S)`.
    pub null_inclusion: bool,
    /// `R(S) ⊆ R(T)`.
    pub range_inclusion: bool,
    pub admissible: bool,
    /// Admissible with a norm in `[1 − 1e-8, 1)`.
    pub marginal: bool,
}

fn same_shape(t: &Operator, s: &Operator) -> Result<()> {
    if t.shape() != s.shape() {
        return Err(Error::dims(
            "perturbation",
            format!("{}x{}", t.rows(), t.cols()),
            format!("{}x{}", s.rows(), s.cols()),
        ));
    }
    Ok(())
}

/// Evaluates the admissibility conditions. Ranks are cut at [`RANK_RTOL`];
/// inclusions are decided with `tol` on the containment defect.
pub fn check_conditions(t: &Operator, s: &Operator, tol: f64) -> Result<PerturbationCheck> {
    same_shape(t, s)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let dt = decompose(t)?;
    let ds = decompose(s)?;
    let null_inclusion = subspace_leq(&dt.null(), &ds.null(), tol)?;
    let range_inclusion = subspace_leq(&ds.range(), &dt.range(), tol)?;

    let t_dag = pinv_matrix(t, Some(dt.tol))?;
    let s_m = s.materialize();
    let t_dagger_s_norm = operator_norm(&Operator::Dense(&t_dag * &s_m))?;
    let s_t_dagger_norm = operator_norm(&Operator::Dense(&s_m * &t_dag))?;

    let admissible = null_inclusion && range_inclusion && t_dagger_s_norm < 1.0 && s_t_dagger_norm < 1.0;
    let marginal = admissible && t_dagger_s_norm.max(s_t_dagger_norm) >= 1.0 - MARGINAL_BAND;
    Ok(PerturbationCheck {
        t_dagger_s_norm,
        s_t_dagger_norm,
        null_inclusion,
        range_inclusion,
        admissible,
        marginal,
    })
}

fn require_admissible(t: &Operator, s: &Operator, tol: f64) -> Result<Matrix> {
    let check = check_conditions(t, s, tol)?;
    if !check.admissible {
        return Err(Error::Inadmissible(Box::new(check)));
    }
    pinv_matrix(t, Some(rank_tol(t)?))
}

/// `(I + T†S)⁻¹ T†` by a dense solve. Refuses inadmissible pairs.
pub fn perturbed_pinv(t: &Operator, s: &Operator, tol: f64) -> Result<Operator> {
    let t_dag = require_admissible(t, s, tol)?;
    let n = t.cols();
    let system = &Matrix::identity(n) + &(&t_dag * &s.materialize());
    Ok(Operator::Dense(system.solve(&t_dag)?))
}

#[derive(Debug, Clone)]
pub struct NeumannExpansion {
    pub pinv: Operator,
    /// Number of series terms summed, the leading `T†` included.
    pub terms: usize,
    /// Frobenius norm of the first term left out, below the series tolerance.
    pub last_term_norm: f64,
}

/// `Σ_{j≥0} (−T†S)ʲ T†`, summed until the next term's Frobenius norm drops
/// below `series_tol`. On failure the error carries the norm of the last term
/// that was added. Admissibility is checked at the default subspace tolerance.
pub fn neumann_perturbed_pinv(
    t: &Operator,
    s: &Operator,
    max_terms: usize,
    series_tol: f64,
) -> Result<NeumannExpansion> {
    if !(series_tol > 0.0 && series_tol.is_finite()) {
        return Err(Error::InvalidTolerance(series_tol));
    }
    let t_dag = require_admissible(t, s, SUBSPACE_TOL)?;
    let step = (&t_dag * &s.materialize()).scale_real(-1.0);
    let mut term = t_dag.clone();
    let mut sum = t_dag;
    let mut terms = 1;
    let mut last_term_norm = term.frobenius_norm();
    loop {
        let next = &step * &term;
        let next_norm = next.frobenius_norm();
        if next_norm < series_tol {
            last_term_norm = next_norm;
            break;
        }
        if terms >= max_terms {
            return Err(Error::SeriesNotConverged { terms, last_term_norm });
        }
        sum = &sum + &next;
        term = next;
        terms += 1;
        last_term_norm = next_norm;
    }
    Ok(NeumannExpansion {
        pinv: Operator::Dense(sum),
        terms,
        last_term_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(d: &[f64]) -> Operator {
        Operator::diagonal_real(d).unwrap()
    }

    #[test]
    fn admissible_diagonal_pair() {
        let c = check_conditions(&diag(&[2.0, 0.0]), &diag(&[0.5, 0.0]), SUBSPACE_TOL).unwrap();
        assert_eq!(c.t_dagger_s_norm, 0.25);
        assert_eq!(c.s_t_dagger_norm, 0.25);
        assert!(c.null_inclusion && c.range_inclusion && c.admissible && !c.marginal);
    }

    #[test]
    fn zero_perturbation_is_admissible() {
        let t = Operator::dense(Matrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[0.0, 1.0]]).unwrap()).unwrap();
        let c = check_conditions(&t, &Operator::zero(3, 2).unwrap(), SUBSPACE_TOL).unwrap();
        assert_eq!((c.t_dagger_s_norm, c.s_t_dagger_norm), (0.0, 0.0));
        assert!(c.admissible);
        let p = perturbed_pinv(&t, &Operator::zero(3, 2).unwrap(), SUBSPACE_TOL).unwrap();
        assert_eq!(p.materialize(), pinv_matrix(&t, None).unwrap());
    }

    #[test]
    fn perturbation_acting_on_kernel_is_refused() {
        let t = diag(&[1.0, 0.0]);
        let s = diag(&[0.0, 0.5]);
        let c = check_conditions(&t, &s, SUBSPACE_TOL).unwrap();
        assert!(!c.null_inclusion);
        assert!(!c.admissible);
        assert!(matches!(perturbed_pinv(&t, &s, SUBSPACE_TOL), Err(Error::Inadmissible(_))));
        assert!(matches!(neumann_perturbed_pinv(&t, &s, 100, 1e-12), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn large_perturbation_is_refused() {
        let c = check_conditions(&diag(&[1.0]), &diag(&[1.5]), SUBSPACE_TOL).unwrap();
        assert!(c.null_inclusion && c.range_inclusion);
        assert!(!c.admissible);
    }

    #[test]
    fn marginal_flag() {
        let c = check_conditions(&diag(&[1.0]), &diag(&[1.0 - 1e-9]), SUBSPACE_TOL).unwrap();
        assert!(c.admissible && c.marginal);
    }

    #[test]
    fn closed_form_on_diagonal_pair() {
        // (I + T†S)⁻¹T† = diag(1/1.25, 1)·diag(0.5, 0) = diag(0.4, 0), the pinv of diag(2.5, 0).
        let p = perturbed_pinv(&diag(&[2.0, 0.0]), &diag(&[0.5, 0.0]), SUBSPACE_TOL).unwrap().materialize();
        let direct = pinv_matrix(&diag(&[2.5, 0.0]), None).unwrap();
        assert!((&p - &direct).max_abs() <= 1e-16);
        assert!((p[(0, 0)].re - 0.4).abs() <= 1e-16);
    }

    #[test]
    fn neumann_on_diagonal_pair() {
        let e = neumann_perturbed_pinv(&diag(&[2.0, 0.0]), &diag(&[0.5, 0.0]), 100, 1e-12).unwrap();
        assert!(e.terms <= 22, "took {} terms", e.terms);
        assert!((e.pinv.materialize()[(0, 0)].re - 0.4).abs() < 1e-12);
        assert!(e.last_term_norm < 1e-12);
    }

    #[test]
    fn neumann_with_zero_perturbation_is_one_term() {
        let t = diag(&[3.0, 1.0]);
        let e = neumann_perturbed_pinv(&t, &Operator::zero(2, 2).unwrap(), 10, 1e-12).unwrap();
        assert_eq!(e.terms, 1);
        assert_eq!(e.pinv.materialize(), pinv_matrix(&t, None).unwrap());
    }

    #[test]
    fn neumann_reports_non_convergence() {
        let r = neumann_perturbed_pinv(&diag(&[2.0, 0.0]), &diag(&[0.5, 0.0]), 3, 1e-12);
        match r {
            Err(Error::SeriesNotConverged { terms, last_term_norm }) => {
                assert_eq!(terms, 3);
                assert!((last_term_norm - 0.5 * 0.0625).abs() < 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch() {
        assert!(matches!(
            check_conditions(&diag(&[1.0]), &diag(&[1.0, 2.0]), SUBSPACE_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
