//! Full singular value decomposition by one-sided (Hestenes) Jacobi.
//!
//! Jacobi is slower than bidiagonalization-based methods but it determines
//! small singular values to high relative accuracy, and every rank decision in
//! this crate is a threshold on those values.
//!
//! For an `m x n` input with `m >= n` the columns of a working copy of `A` are
//! rotated pairwise until they are mutually orthogonal; the accumulated
//! rotations form `V`, the column norms are the singular values and the
//! normalized columns are the leading columns of `U`. `U` is completed to a
//! full unitary basis by Gram-Schmidt. Wide inputs are handled through the
//! adjoint.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64};

const MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m x m` unitary.
    pub u: Matrix,
    /// Non-increasing, length `min(m, n)`.
    pub sigma: Vec<f64>,
    /// `n x n` unitary.
    pub v: Matrix,
}

impl SvdFactors {
    /// `U Σ V*` for checking purposes.
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut us = Matrix::zeros(m, n);
        for i in 0..m {
            for (j, &s) in self.sigma.iter().enumerate() {
                us[(i, j)] = self.u[(i, j)] * s;
            }
        }
        &us * &self.v.adjoint()
    }

    pub fn largest(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.sigma.iter().take_while(|&&s| s > tol).count()
    }
}

pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    if let Some((row, col)) = a.find_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let f = svd_tall(&a.adjoint())?;
        Ok(SvdFactors {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        })
    }
}

/// Largest singular value (spectral norm). Zero for empty matrices.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.largest())
}

fn svd_tall(a: &Matrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(SvdFactors {
            u: Matrix::identity(m),
            sigma: Vec::new(),
            v: Matrix::zeros(0, 0),
        });
    }

    // Column-major working storage: cols[j] is column j.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let tol = f64::EPSILON * m as f64;
    // Pairs whose inner product is below rounding of the whole matrix are left
    // alone; without this floor, columns at underflow level never pass the
    // relative test.
    let fro_sq: f64 = cols.iter().flatten().map(|z| z.norm_sqr()).sum();
    let floor = f64::EPSILON * f64::EPSILON * fro_sq;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= floor || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase of column q so that the inner product is real,
                // then apply a real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, phase, c, s);
                rotate(&mut vcols, p, q, phase, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the result deterministic under ties.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let sigma_max = sigma[0];
    let v_sorted: Vec<Vec<C64>> = order.iter().map(|&j| vcols[j].clone()).collect();

    // Columns whose norm is at rounding level relative to the largest carry no
    // reliable direction; they are replaced by the completion.
    let keep = sigma_max * f64::EPSILON;
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if sigma[k] > keep && sigma[k] > 0.0 {
            let inv = 1.0 / sigma[k];
            ucols.push(cols[j].iter().map(|z| z * inv).collect());
        } else {
            ucols.push(Vec::new());
            missing.push(k);
        }
    }
    complete_basis(&mut ucols, &missing, m);

    Ok(SvdFactors {
        u: Matrix::from_columns(m, &ucols),
        sigma,
        v: Matrix::from_columns(n, &v_sorted),
    })
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, phase: C64, c: f64, s: f64) {
    let conj_phase = phase.conj();
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * conj_phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Fills the empty slots listed in `missing` and appends columns until
/// `cols` holds `m` orthonormal vectors. Candidates are standard basis
/// vectors, picked greedily by largest residual after two passes of
/// Gram-Schmidt against the current basis.
fn complete_basis(cols: &mut Vec<Vec<C64>>, missing: &[usize], m: usize) {
    let mut basis: Vec<Vec<C64>> = cols.iter().filter(|c| !c.is_empty()).cloned().collect();
    let mut fresh = Vec::new();
    while basis.len() < m {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for i in 0..m {
            let mut cand = vec![C64::new(0.0, 0.0); m];
            cand[i] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let proj: C64 = b.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                    for (c, x) in cand.iter_mut().zip(b) {
                        *c -= proj * x;
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("m > 0 when basis is incomplete");
        let unit: Vec<C64> = cand.iter().map(|z| z / norm).collect();
        basis.push(unit.clone());
        fresh.push(unit);
    }
    let mut fresh = fresh.into_iter();
    for &k in missing {
        cols[k] = fresh.next().expect("enough completion vectors");
    }
    cols.extend(fresh);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitary_defect(u: &Matrix) -> f64 {
        (&(&u.adjoint() * u) - &Matrix::identity(u.cols())).frobenius_norm()
    }

    fn check(a: &Matrix) -> SvdFactors {
        let f = svd(a).unwrap();
        assert_eq!(f.u.shape(), (a.rows(), a.rows()));
        assert_eq!(f.v.shape(), (a.cols(), a.cols()));
        assert_eq!(f.sigma.len(), a.rows().min(a.cols()));
        assert!(unitary_defect(&f.u) <= 1e-12, "U defect {}", unitary_defect(&f.u));
        assert!(unitary_defect(&f.v) <= 1e-12, "V defect {}", unitary_defect(&f.v));
        let err = (&f.reconstruct() - a).frobenius_norm();
        assert!(err <= 1e-12 * a.frobenius_norm().max(1.0), "reconstruction {err}");
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        f
    }

    #[test]
    fn diagonal_spectrum() {
        let f = check(&Matrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 1.0]]).unwrap());
        assert_eq!(f.sigma, vec![3.0, 1.0]);
        let f = check(&Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 3.0]]).unwrap());
        assert_eq!(f.sigma, vec![3.0, 1.0]);
    }

    #[test]
    fn zero_matrix() {
        let f = check(&Matrix::zeros(2, 2));
        assert_eq!(f.sigma, vec![0.0, 0.0]);
    }

    #[test]
    fn rank_one_example() {
        // AᴴA = [[1,1],[1,1]] has eigenvalues 2 and 0.
        let f = check(&Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap());
        assert!((f.sigma[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!(f.sigma[1].abs() < 1e-15);
    }

    #[test]
    fn rectangular_and_complex() {
        let a = Matrix::from_fn(5, 3, |i, j| C64::new((i * 3 + j) as f64 * 0.37 - 1.0, (i as f64 - j as f64) * 0.21));
        check(&a);
        check(&a.adjoint());
        let row = Matrix::from_real(1, 4, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        let f = check(&row);
        assert!((f.sigma[0] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn empty_inputs() {
        let f = svd(&Matrix::zeros(3, 0)).unwrap();
        assert!(f.sigma.is_empty());
        assert_eq!(f.u, Matrix::identity(3));
        let f = svd(&Matrix::zeros(0, 2)).unwrap();
        assert!(f.sigma.is_empty());
        assert_eq!(f.v, Matrix::identity(2));
    }

    #[test]
    fn rejects_non_finite() {
        let a = Matrix::from_real(1, 2, &[1.0, f64::NAN]).unwrap();
        assert!(matches!(svd(&a), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn spectral_norm_of_diag() {
        let a = Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -2.0]]).unwrap();
        assert_eq!(spectral_norm(&a).unwrap(), 2.0);
    }
}
