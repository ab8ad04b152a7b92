//! Direct-sum pseudoinverses, absolute values, and the norm/γ formulas for
//! direct sums, each paired with a residual check against the dense route.

use crate::error::Result;
use crate::matrix::{normalized_residual, Matrix, C64};
use crate::operator::{direct_sum, Operator};
use crate::pinv::{gamma, operator_norm, pinv_matrix};
use crate::svd::svd;

/// `|T| = (T*T)^{1/2}` and `|T*| = (TT*)^{1/2}`.
#[derive(Debug, Clone)]
pub struct PolarParts {
    /// `n x n`.
    pub abs: Operator,
    /// `m x m`.
    pub abs_adj: Operator,
}

/// `W diag(s) W*` with `s` zero-padded to the size of `W`.
fn psd_from_factor(w: &Matrix, sigma: &[f64]) -> Matrix {
    let n = w.rows();
    let mut ws = Matrix::zeros(n, n);
    for i in 0..n {
        for (k, &s) in sigma.iter().enumerate() {
            ws[(i, k)] = w[(i, k)] * s;
        }
    }
    let mut out = &ws * &w.adjoint();
    // Symmetrize away rounding so the result is Hermitian to the last bit.
    for i in 0..n {
        out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    out
}

/// Absolute values from the SVD: `|T| = V Σ V*`, `|T*| = U Σ U*`.
pub fn abs_op(op: &Operator) -> Result<PolarParts> {
    if let Operator::Diagonal(d) = op {
        let abs = Operator::Diagonal(d.iter().map(|z| C64::new(z.norm(), 0.0)).collect());
        return Ok(PolarParts {
            abs: abs.clone(),
            abs_adj: abs,
        });
    }
    let f = svd(&op.materialize())?;
    Ok(PolarParts {
        abs: Operator::Dense(psd_from_factor(&f.v, &f.sigma)),
        abs_adj: Operator::Dense(psd_from_factor(&f.u, &f.sigma)),
    })
}

/// `T₁† ⊕ T₂†`, built blockwise.
pub fn pinv_direct_sum(t1: &Operator, t2: &Operator, tol: Option<f64>) -> Result<Operator> {
    Ok(direct_sum(
        &Operator::Dense(pinv_matrix(t1, tol)?),
        &Operator::Dense(pinv_matrix(t2, tol)?),
    ))
}

/// Residual of the blockwise factorization: blockwise pseudoinverse against
/// the pseudoinverse of the materialized block-diagonal operator.
pub fn pinv_direct_sum_residual(t1: &Operator, t2: &Operator, tol: Option<f64>) -> Result<f64> {
    let blockwise = pinv_direct_sum(t1, t2, tol)?.materialize();
    let whole = Operator::Dense(direct_sum(t1, t2).materialize());
    Ok(normalized_residual(&pinv_matrix(&whole, tol)?, &blockwise))
}

/// `|‖T₁† ⊕ T₂†‖ − max(‖T₁†‖, ‖T₂†‖)|`, with the left norm taken from the SVD
/// of the materialized block matrix.
pub fn norm_max_check(t1: &Operator, t2: &Operator) -> Result<f64> {
    norm_max_check_with_tol(t1, t2, None)
}

pub fn norm_max_check_with_tol(t1: &Operator, t2: &Operator, tol: Option<f64>) -> Result<f64> {
    let p1 = Operator::Dense(pinv_matrix(t1, tol)?);
    let p2 = Operator::Dense(pinv_matrix(t2, tol)?);
    let whole = Operator::Dense(direct_sum(&p1, &p2).materialize());
    let lhs = operator_norm(&whole)?;
    let rhs = operator_norm(&p1)?.max(operator_norm(&p2)?);
    Ok((lhs - rhs).abs())
}

/// `|γ(T₁ ⊕ T₂) − min(γ(T₁), γ(T₂))|`. A zero summand contributes nothing to
/// the minimum; both zero is an error.
pub fn gamma_min_check(t1: &Operator, t2: &Operator, tol: Option<f64>) -> Result<f64> {
    let whole = Operator::Dense(direct_sum(t1, t2).materialize());
    let g = gamma(&whole, tol)?;
    let parts = [gamma(t1, tol).ok(), gamma(t2, tol).ok()];
    let min = parts.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok((g - min).abs())
}

/// Residuals of `|(T₁⊕T₂)†| = |T₁†| ⊕ |T₂†|` and of
/// `|T₁⊕T₂|† = |T₁|† ⊕ |T₂|† = |((T₁⊕T₂)*)†|` (the larger of the two links).
pub fn abs_pinv_identities(t1: &Operator, t2: &Operator, tol: Option<f64>) -> Result<(f64, f64)> {
    let sum = Operator::Dense(direct_sum(t1, t2).materialize());

    // |(T₁⊕T₂)†| against |T₁†| ⊕ |T₂†|.
    let lhs = abs_op(&Operator::Dense(pinv_matrix(&sum, tol)?))?.abs.materialize();
    let p1 = Operator::Dense(pinv_matrix(t1, tol)?);
    let p2 = Operator::Dense(pinv_matrix(t2, tol)?);
    let rhs = direct_sum(&abs_op(&p1)?.abs, &abs_op(&p2)?.abs).materialize();
    let abs_of_pinv = normalized_residual(&lhs, &rhs);

    // |T₁⊕T₂|† against |T₁|† ⊕ |T₂|† and |((T₁⊕T₂)*)†|.
    let abs_sum = abs_op(&sum)?.abs;
    let left = pinv_matrix(&abs_sum, Some(rank_tol_for(&abs_sum, tol)?))?;
    let a1 = abs_op(t1)?.abs;
    let a2 = abs_op(t2)?.abs;
    let blockwise = direct_sum(
        &Operator::Dense(pinv_matrix(&a1, Some(rank_tol_for(&a1, tol)?))?),
        &Operator::Dense(pinv_matrix(&a2, Some(rank_tol_for(&a2, tol)?))?),
    )
    .materialize();
    let adj_pinv = Operator::Dense(pinv_matrix(&sum.adjoint(), tol)?);
    let abs_adj_pinv = abs_op(&adj_pinv)?.abs.materialize();
    let pinv_of_abs = normalized_residual(&left, &blockwise).max(normalized_residual(&left, &abs_adj_pinv));

    Ok((abs_of_pinv, pinv_of_abs))
}

/// `|T|` carries the spectrum of `T` but its zero singular values come back at
/// rounding level from the Gram product, so when no tolerance is given the
/// rank cut uses the default tolerance of `T` inflated by the dimension.
fn rank_tol_for(abs: &Operator, tol: Option<f64>) -> Result<f64> {
    if let Some(t) = tol {
        return Ok(t);
    }
    let s = operator_norm(abs)?;
    let n = abs.rows() as f64;
    Ok(if s == 0.0 { f64::EPSILON } else { n * n * s * f64::EPSILON })
}
