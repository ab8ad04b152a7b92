//! Moore-Penrose inverse by two routes, and the subspaces around it.
//!
//! [`pinv`] is the SVD route `V Σ† U*`. [`pinv_by_definition`] builds the
//! inverse the way it is defined on `R(T) ⊕ R(T)⊥`: invert `T` restricted to
//! its carrier `C(T) = N(T)⊥` on the range, and send the orthogonal complement
//! of the range to zero. The restricted map is inverted with an LU solve, so
//! the two routes share only the subspace bases.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::Operator;
use crate::svd::{spectral_norm, svd, SvdFactors};

/// Default projector-distance tolerance for subspace comparisons.
pub const SUBSPACE_TOL: f64 = 1e-8;

const TWO_POW_M52: f64 = f64::EPSILON;

#[derive(Debug, Clone)]
pub struct PinvResult {
    /// Dense `n x m` pseudoinverse.
    pub pinv: Operator,
    pub rank: usize,
    pub tol_used: f64,
    pub sigma: Vec<f64>,
    /// Smallest singular value above `tol_used`; `None` iff `rank == 0`.
    pub gamma: Option<f64>,
}

/// `max(m, n) · σ_max · 2⁻⁵²`, or `2⁻⁵²` for the zero operator.
pub fn default_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    if sigma_max == 0.0 {
        TWO_POW_M52
    } else {
        rows.max(cols) as f64 * sigma_max * TWO_POW_M52
    }
}

fn resolve_tol(rows: usize, cols: usize, f: &SvdFactors, tol: Option<f64>) -> Result<f64> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Error::InvalidTolerance(t)),
        Some(t) => Ok(t),
        None => Ok(default_tolerance(rows, cols, f.largest())),
    }
}

/// SVD of an operator together with its resolved rank tolerance and rank.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub factors: SvdFactors,
    pub tol: f64,
    pub rank: usize,
}

impl Decomposition {
    pub fn of(op: &Operator, tol: Option<f64>) -> Result<Self> {
        let factors = svd(&op.materialize())?;
        let tol = resolve_tol(op.rows(), op.cols(), &factors, tol)?;
        let rank = factors.rank(tol);
        Ok(Decomposition { factors, tol, rank })
    }

    pub fn range(&self) -> Subspace {
        Subspace::from_orthonormal(self.factors.u.columns(0..self.rank))
    }

    pub fn range_complement(&self) -> Subspace {
        Subspace::from_orthonormal(self.factors.u.columns(self.rank..self.factors.u.cols()))
    }

    pub fn carrier(&self) -> Subspace {
        Subspace::from_orthonormal(self.factors.v.columns(0..self.rank))
    }

    pub fn null(&self) -> Subspace {
        Subspace::from_orthonormal(self.factors.v.columns(self.rank..self.factors.v.cols()))
    }

    fn pinv_matrix(&self) -> Matrix {
        let (m, n) = (self.factors.u.rows(), self.factors.v.rows());
        // V_r Σ_r⁻¹ U_r*
        let mut vs = Matrix::zeros(n, self.rank);
        for i in 0..n {
            for k in 0..self.rank {
                vs[(i, k)] = self.factors.v[(i, k)] / self.factors.sigma[k];
            }
        }
        let ur = self.factors.u.columns(0..self.rank);
        if self.rank == 0 {
            Matrix::zeros(n, m)
        } else {
            &vs * &ur.adjoint()
        }
    }
}

pub fn pinv(op: &Operator, tol: Option<f64>) -> Result<PinvResult> {
    let d = Decomposition::of(op, tol)?;
    let gamma = d.rank.checked_sub(1).map(|k| d.factors.sigma[k]);
    Ok(PinvResult {
        pinv: Operator::Dense(d.pinv_matrix()),
        rank: d.rank,
        tol_used: d.tol,
        sigma: d.factors.sigma.clone(),
        gamma,
    })
}

/// Convenience: just the pseudoinverse matrix.
pub fn pinv_matrix(op: &Operator, tol: Option<f64>) -> Result<Matrix> {
    Ok(Decomposition::of(op, tol)?.pinv_matrix())
}

/// Pseudoinverse assembled column by column from its defining cases.
///
/// For every standard basis vector `e_j` of `K`, the component in `R(T)` is
/// mapped to the unique preimage inside the carrier by solving the restricted
/// system `U_r* T V_r z = U_r* e_j`; the component in `R(T)⊥` maps to zero.
pub fn pinv_by_definition(op: &Operator, tol: f64) -> Result<Matrix> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let d = Decomposition::of(op, Some(tol))?;
    let (m, n) = op.shape();
    if d.rank == 0 {
        return Ok(Matrix::zeros(n, m));
    }
    let range = d.factors.u.columns(0..d.rank);
    let carrier = d.factors.v.columns(0..d.rank);
    let t = op.materialize();
    // T restricted to C(T), expressed in the carrier/range bases.
    let restricted = &(&range.adjoint() * &t) * &carrier;
    // Coordinates in the range basis of the R(T)-component of each e_j.
    let coords = range.adjoint();
    let z = restricted.solve(&coords)?;
    Ok(&carrier * &z)
}

pub fn range_projector(op: &Operator, tol: Option<f64>) -> Result<Matrix> {
    Ok(Decomposition::of(op, tol)?.range().projector())
}

pub fn null_projector(op: &Operator, tol: Option<f64>) -> Result<Matrix> {
    Ok(Decomposition::of(op, tol)?.null().projector())
}

/// Projector onto the carrier `N(T)⊥`.
pub fn carrier_projector(op: &Operator, tol: Option<f64>) -> Result<Matrix> {
    Ok(Decomposition::of(op, tol)?.carrier().projector())
}

/// Reduced minimum modulus: the smallest singular value above `tol`.
pub fn gamma(op: &Operator, tol: Option<f64>) -> Result<f64> {
    let d = Decomposition::of(op, tol)?;
    match d.rank {
        0 => Err(Error::ZeroOperator),
        r => Ok(d.factors.sigma[r - 1]),
    }
}

/// Spectral norm (largest singular value).
pub fn operator_norm(op: &Operator) -> Result<f64> {
    match op {
        Operator::Diagonal(d) => Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        _ => spectral_norm(&op.materialize()),
    }
}

/// A subspace held as a matrix with orthonormal columns.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    /// Orthonormalizes the span of the given columns; directions whose singular
    /// value falls at or below `tol` are dropped.
    pub fn span(columns: &Matrix, tol: Option<f64>) -> Result<Self> {
        let f = svd(columns)?;
        let t = resolve_tol(columns.rows(), columns.cols(), &f, tol)?;
        let r = f.rank(t);
        Ok(Subspace {
            basis: f.u.columns(0..r),
        })
    }

    pub fn trivial(ambient_dim: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> Matrix {
        &self.basis * &self.basis.adjoint()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        (&(&self.basis.adjoint() * &self.basis) - &Matrix::identity(self.dim())).frobenius_norm()
    }
}

fn ensure_same_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::AmbientMismatch {
            left: a.ambient_dim(),
            right: b.ambient_dim(),
        });
    }
    Ok(())
}

/// `‖(I − P_b) P_a‖₂`: how far `a` sticks out of `b`.
pub fn containment_defect(a: &Subspace, b: &Subspace) -> Result<f64> {
    ensure_same_ambient(a, b)?;
    if a.dim() == 0 {
        return Ok(0.0);
    }
    // (I − P_b) P_a = (A − B B* A) A*, and its norm equals ‖A − B B* A‖₂.
    let a_basis = a.basis();
    let residual = a_basis - &(&b.basis * &(&b.basis.adjoint() * a_basis));
    spectral_norm(&residual)
}

/// `‖P_a − P_b‖₂`.
pub fn projector_distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    ensure_same_ambient(a, b)?;
    spectral_norm(&(&a.projector() - &b.projector()))
}

pub fn subspace_leq(a: &Subspace, b: &Subspace, tol: f64) -> Result<bool> {
    Ok(containment_defect(a, b)? <= tol)
}

pub fn subspace_eq(a: &Subspace, b: &Subspace, tol: f64) -> Result<bool> {
    Ok(subspace_leq(a, b, tol)? && subspace_leq(b, a, tol)?)
}

/// Largest deviation from the four Penrose equations, each normalized by
/// `1 + ‖A‖_F + ‖P‖_F`.
pub fn penrose_defect(a: &Matrix, p: &Matrix) -> f64 {
    let ap = a * p;
    let pa = p * a;
    let scale = 1.0 + a.frobenius_norm() + p.frobenius_norm();
    let e1 = (&(&ap * a) - a).frobenius_norm();
    let e2 = (&(&pa * p) - p).frobenius_norm();
    let e3 = (&ap.adjoint() - &ap).frobenius_norm();
    let e4 = (&pa.adjoint() - &pa).frobenius_norm();
    e1.max(e2).max(e3).max(e4) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> Operator {
        Operator::dense(Matrix::from_real_rows(rows).unwrap()).unwrap()
    }

    fn diag(d: &[f64]) -> Operator {
        Operator::diagonal_real(d).unwrap()
    }

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        let err = (a - b).max_abs();
        assert!(err <= tol, "max entry error {err} > {tol}\n{a:?}\n{b:?}");
    }

    #[test]
    fn diagonal_pinv_inverts_entries() {
        let r = pinv(&diag(&[1.0, 2.0, 3.0]), None).unwrap();
        assert_close(&r.pinv.materialize(), &diag(&[1.0, 0.5, 1.0 / 3.0]).materialize(), 1e-15);
        assert_eq!(r.rank, 3);
        assert_eq!(r.gamma, Some(1.0));
    }

    #[test]
    fn zero_pinv() {
        let r = pinv(&Operator::zero(2, 3).unwrap(), None).unwrap();
        assert_eq!(r.pinv.materialize(), Matrix::zeros(3, 2));
        assert_eq!(r.rank, 0);
        assert_eq!(r.gamma, None);
        assert_eq!(r.tol_used, f64::EPSILON);
    }

    #[test]
    fn rank_one_pinv() {
        let t = dense(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let r = pinv(&t, None).unwrap();
        let expect = Matrix::from_real_rows(&[&[0.5, 0.0], &[0.5, 0.0]]).unwrap();
        assert_close(&r.pinv.materialize(), &expect, 1e-15);
        assert_close(&pinv_by_definition(&t, 1e-12).unwrap(), &expect, 1e-15);
        assert_eq!(r.rank, 1);
        assert!((r.gamma.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_tolerances() {
        let t = diag(&[1.0]);
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(pinv(&t, Some(bad)), Err(Error::InvalidTolerance(_))));
            assert!(matches!(pinv_by_definition(&t, bad), Err(Error::InvalidTolerance(_))));
        }
    }

    #[test]
    fn definition_route_examples() {
        assert_close(
            &pinv_by_definition(&diag(&[2.0, 0.0]), 1e-12).unwrap(),
            &Matrix::from_real_rows(&[&[0.5, 0.0], &[0.0, 0.0]]).unwrap(),
            0.0,
        );
        assert_close(&pinv_by_definition(&diag(&[1.0; 4]), 1e-12).unwrap(), &Matrix::identity(4), 1e-15);
    }

    #[test]
    fn projector_examples() {
        assert_close(&range_projector(&diag(&[1.0, 0.0]), None).unwrap(), &diag(&[1.0, 0.0]).materialize(), 0.0);
        let full = dense(&[&[2.0, 1.0], &[1.0, 3.0]]);
        assert_close(&range_projector(&full, None).unwrap(), &Matrix::identity(2), 1e-15);
        let t = dense(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert_close(
            &range_projector(&t, None).unwrap(),
            &Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap(),
            1e-15,
        );
        let n = null_projector(&t, None).unwrap();
        let c = carrier_projector(&t, None).unwrap();
        assert_close(&(&n + &c), &Matrix::identity(2), 1e-15);
        assert_close(&c, &Matrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap(), 1e-15);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(&diag(&[1.0, 2.0, 3.0, 0.0]), None).unwrap(), 1.0);
        assert_eq!(gamma(&Operator::identity(5).unwrap(), None).unwrap(), 1.0);
        let s = crate::operator::direct_sum(&diag(&[2.0, 3.0]), &diag(&[5.0]));
        assert_eq!(gamma(&s, None).unwrap(), 2.0);
        assert!(matches!(gamma(&Operator::zero(3, 2).unwrap(), None), Err(Error::ZeroOperator)));
    }

    #[test]
    fn gamma_of_sum_with_zero_summand_is_gamma_of_the_other() {
        let s = crate::operator::direct_sum(&diag(&[4.0, 7.0]), &Operator::zero(2, 2).unwrap());
        assert_eq!(gamma(&s, None).unwrap(), 4.0);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(operator_norm(&diag(&[1.0, -2.0])).unwrap(), 2.0);
        assert_eq!(operator_norm(&Operator::zero(2, 2).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn subspace_ordering() {
        let e1 = Subspace::span(&Matrix::from_real(3, 1, &[1.0, 0.0, 0.0]).unwrap(), None).unwrap();
        let e12 = Subspace::span(&Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap(), None).unwrap();
        assert!(subspace_leq(&e1, &e12, SUBSPACE_TOL).unwrap());
        assert!(!subspace_leq(&e12, &e1, SUBSPACE_TOL).unwrap());
        assert!(!subspace_eq(&e1, &e12, SUBSPACE_TOL).unwrap());
        assert!(subspace_eq(&e12, &e12, SUBSPACE_TOL).unwrap());
        assert!(subspace_leq(&Subspace::trivial(3), &e1, SUBSPACE_TOL).unwrap());
        let other = Subspace::trivial(2);
        assert!(matches!(subspace_eq(&e1, &other, 1e-8), Err(Error::AmbientMismatch { .. })));
    }

    #[test]
    fn span_drops_dependent_columns() {
        let cols = Matrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0]]).unwrap();
        let s = Subspace::span(&cols, None).unwrap();
        assert_eq!(s.dim(), 1);
        assert!(s.orthogonality_defect() < 1e-14);
    }
}
