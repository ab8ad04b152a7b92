//! Structured linear operators over complex scalars.
//!
//! An [`Operator`] is dense, square diagonal, or a direct sum of two operators.
//! Direct sums stay structural: they are only flattened into a block-diagonal
//! matrix by [`Operator::materialize`]. Vectors of a sum space `H ⊕ K` are
//! concatenations with the left block first.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::matrix::{vec_norm, Matrix, C64};

/// A finite vector of complex scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<C64>);

impl Vector {
    pub fn new(entries: Vec<C64>) -> Self {
        Vector(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Vector(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.0)
    }

    /// Pairs `(h, k)` into the sum space.
    pub fn concat(h: &Vector, k: &Vector) -> Vector {
        let mut v = h.0.clone();
        v.extend_from_slice(&k.0);
        Vector(v)
    }

    pub fn split_at(&self, mid: usize) -> (Vector, Vector) {
        let (a, b) = self.0.split_at(mid);
        (Vector(a.to_vec()), Vector(b.to_vec()))
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [C64];

    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl From<Vec<C64>> for Vector {
    fn from(v: Vec<C64>) -> Self {
        Vector(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Dense(Matrix),
    /// Square operator with the given diagonal.
    Diagonal(Vec<C64>),
    DirectSum(Box<Operator>, Box<Operator>),
}

fn check_finite(m: &Matrix) -> Result<()> {
    match m.find_non_finite() {
        Some((row, col)) => Err(Error::NonFinite { row, col }),
        None => Ok(()),
    }
}

impl Operator {
    pub fn dense(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Err(Error::EmptyOperator {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        check_finite(&m)?;
        Ok(Operator::Dense(m))
    }

    pub fn diagonal(diag: Vec<C64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyOperator { rows: 0, cols: 0 });
        }
        if let Some(p) = diag.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: p, col: p });
        }
        Ok(Operator::Diagonal(diag))
    }

    pub fn diagonal_real(diag: &[f64]) -> Result<Self> {
        Self::diagonal(diag.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal_real(&vec![1.0; n])
    }

    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Self::dense(Matrix::zeros(rows, cols))
    }

    pub fn rows(&self) -> usize {
        match self {
            Operator::Dense(m) => m.rows(),
            Operator::Diagonal(d) => d.len(),
            Operator::DirectSum(a, b) => a.rows() + b.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Operator::Dense(m) => m.cols(),
            Operator::Diagonal(d) => d.len(),
            Operator::DirectSum(a, b) => a.cols() + b.cols(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows(), self.cols())
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vector> {
        if x.len() != self.cols() {
            return Err(Error::dims("apply", self.cols(), x.len()));
        }
        match self {
            Operator::Dense(m) => m.matvec(x).map(Vector),
            Operator::Diagonal(d) => Ok(Vector(d.iter().zip(x).map(|(a, b)| a * b).collect())),
            Operator::DirectSum(a, b) => {
                let (xa, xb) = x.split_at(a.cols());
                let mut out = a.apply(xa)?.0;
                out.extend(b.apply(xb)?.0);
                Ok(Vector(out))
            }
        }
    }

    /// Conjugate transpose, preserving structure.
    pub fn adjoint(&self) -> Operator {
        match self {
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
            Operator::Diagonal(d) => Operator::Diagonal(d.iter().map(|z| z.conj()).collect()),
            Operator::DirectSum(a, b) => Operator::DirectSum(Box::new(a.adjoint()), Box::new(b.adjoint())),
        }
    }

    /// Product `self · rhs`. Diagonal and split-compatible direct-sum factors
    /// keep their structure; everything else is dense.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.cols() != rhs.rows() {
            return Err(Error::dims(
                "compose",
                format!("{} rows", self.cols()),
                format!("{} rows", rhs.rows()),
            ));
        }
        match (self, rhs) {
            (Operator::Diagonal(a), Operator::Diagonal(b)) => {
                Ok(Operator::Diagonal(a.iter().zip(b).map(|(x, y)| x * y).collect()))
            }
            (Operator::DirectSum(a1, a2), Operator::DirectSum(b1, b2)) if a1.cols() == b1.rows() => Ok(
                Operator::DirectSum(Box::new(a1.compose(b1)?), Box::new(a2.compose(b2)?)),
            ),
            _ => Ok(Operator::Dense(self.materialize().matmul(&rhs.materialize())?)),
        }
    }

    pub fn materialize(&self) -> Matrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Diagonal(d) => Matrix::from_diagonal(d),
            Operator::DirectSum(a, b) => Matrix::block_diag(&a.materialize(), &b.materialize()),
        }
    }

    /// Dense sum `self + rhs`.
    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        Ok(Operator::Dense(self.materialize().try_add(&rhs.materialize())?))
    }

    pub fn scale(&self, s: C64) -> Operator {
        match self {
            Operator::Dense(m) => Operator::Dense(m.scale(s)),
            Operator::Diagonal(d) => Operator::Diagonal(d.iter().map(|z| z * s).collect()),
            Operator::DirectSum(a, b) => Operator::DirectSum(Box::new(a.scale(s)), Box::new(b.scale(s))),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Operator::Dense(m) => m.frobenius_norm(),
            Operator::Diagonal(d) => vec_norm(d),
            Operator::DirectSum(a, b) => a.frobenius_norm().hypot(b.frobenius_norm()),
        }
    }

    pub fn is_direct_sum(&self) -> bool {
        matches!(self, Operator::DirectSum(..))
    }
}

pub fn direct_sum(a: &Operator, b: &Operator) -> Operator {
    Operator::DirectSum(Box::new(a.clone()), Box::new(b.clone()))
}

/// `T₁ ⊕ (T₂ ⊕ (… ⊕ Tₙ))`, right-nested. Returns `None` for an empty list.
pub fn direct_sum_n(ops: &[Operator]) -> Option<Operator> {
    let (last, rest) = ops.split_last()?;
    Some(
        rest.iter()
            .rev()
            .fold(last.clone(), |acc, op| Operator::DirectSum(Box::new(op.clone()), Box::new(acc))),
    )
}
