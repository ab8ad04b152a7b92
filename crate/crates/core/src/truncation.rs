//! Unbounded operators realized as families of finite truncations.
//!
//! Each family maps `n` to a finite operator and, where known, carries the
//! analytic action of the pseudoinverse of the untruncated operator. A
//! convergence study compares the truncated pseudoinverse applied to a probe
//! against that ground truth, charging whatever lies beyond the truncation
//! (the analytic tail) to the residual.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::identities::{run_on_operator, IdentityReport};
use crate::matrix::{vec_norm, C64};
use crate::operator::{Operator, Vector};
use crate::pinv::pinv_matrix;

/// Sequence coordinates are summed out to this index when computing tails.
pub const TAIL_CUTOFF: usize = 1 << 20;

type Generator = Arc<dyn Fn(usize) -> Result<Operator> + Send + Sync>;
type CoordinateMap = Arc<dyn Fn(usize, C64) -> C64 + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Ground-truth pseudoinverse action of the untruncated operator.
#[derive(Clone)]
pub enum AnalyticAction {
    /// On ℓ²: coordinate `k` (1-based) of `T†y` as a function of `k` and `y_k`.
    Coordinatewise(CoordinateMap),
    /// On L²[0,1]: multiplication by the given function.
    Multiplier(RealFn),
}

/// A square-summable input, evaluated lazily.
#[derive(Clone)]
pub enum Probe {
    /// ℓ² sequence, coordinate `k` is 1-based.
    Sequence(Arc<dyn Fn(usize) -> C64 + Send + Sync>),
    /// L²[0,1] function, sampled at cell midpoints.
    Function(RealFn),
}

impl Probe {
    /// `y_k = 1/k`.
    pub fn inverse_index() -> Self {
        Probe::Sequence(Arc::new(|k| C64::new(1.0 / k as f64, 0.0)))
    }

    /// The given leading coordinates, zero afterwards.
    pub fn finitely_supported(coords: Vec<f64>) -> Self {
        Probe::Sequence(Arc::new(move |k| C64::new(coords.get(k - 1).copied().unwrap_or(0.0), 0.0)))
    }

    pub fn constant(value: f64) -> Self {
        Probe::Function(Arc::new(move |_| value))
    }
}

#[derive(Clone)]
pub struct TruncationFamily {
    pub name: String,
    pub description: String,
    generator: Generator,
    pub analytic_pinv_action: Option<AnalyticAction>,
}

impl fmt::Debug for TruncationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncationFamily")
            .field("name", &self.name)
            .field("description", &self.description)
            .field("has_analytic_action", &self.analytic_pinv_action.is_some())
            .finish()
    }
}

impl TruncationFamily {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        generator: impl Fn(usize) -> Result<Operator> + Send + Sync + 'static,
        analytic_pinv_action: Option<AnalyticAction>,
    ) -> Self {
        TruncationFamily {
            name: name.into(),
            description: description.into(),
            generator: Arc::new(generator),
            analytic_pinv_action,
        }
    }

    pub fn generate(&self, n: usize) -> Result<Operator> {
        (self.generator)(n)
    }

    /// Ground-truth `T†` applied to the truncated coordinates of `y`.
    pub fn analytic_pinv_apply(&self, y: &Vector) -> Option<Vector> {
        let action = self.analytic_pinv_action.as_ref()?;
        let n = y.dim();
        let out = match action {
            AnalyticAction::Coordinatewise(f) => y.iter().enumerate().map(|(i, &v)| f(i + 1, v)).collect(),
            AnalyticAction::Multiplier(m) => y
                .iter()
                .enumerate()
                .map(|(i, &v)| v * m(midpoint(i, n)))
                .collect(),
        };
        Some(Vector::new(out))
    }
}

fn midpoint(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// `T(x₁, x₂, …) = (x₁, 2x₂, 3x₃, …)` truncated to `diag(1, …, n)`.
pub fn family_diag_unbounded() -> TruncationFamily {
    TruncationFamily::new(
        "diag-unbounded",
        "diagonal operator k -> k on l2, injective with closed range",
        |n| Operator::diagonal_real(&(1..=n).map(|k| k as f64).collect::<Vec<_>>()),
        Some(AnalyticAction::Coordinatewise(Arc::new(|k, y| y / k as f64))),
    )
}

/// `T(x₁, x₂, …) = (0, 2x₂, 3x₃, …)` truncated to `diag(0, 2, …, n)`.
pub fn family_diag_kernel() -> TruncationFamily {
    TruncationFamily::new(
        "diag-kernel",
        "diagonal operator k -> k on l2 with the first coordinate annihilated",
        |n| Operator::diagonal_real(&(1..=n).map(|k| if k == 1 { 0.0 } else { k as f64 }).collect::<Vec<_>>()),
        Some(AnalyticAction::Coordinatewise(Arc::new(|k, y| {
            if k == 1 {
                C64::new(0.0, 0.0)
            } else {
                y / k as f64
            }
        }))),
    )
}

fn check_multiplier(phi: &RealFn, n: usize) -> Result<()> {
    for i in 0..n {
        let x = midpoint(i, n);
        let value = phi(x);
        if value.is_nan() || value.abs() < 1.0 {
            return Err(Error::MultiplierTooSmall { x, value });
        }
    }
    Ok(())
}

/// Multiplication by `phi` on L²[0,1] with uniform measure, sampled at the
/// midpoints `(i − ½)/n`. `|phi| ≥ 1` is spot-checked on the `n_max` grid at
/// construction and on every generated grid.
pub fn family_multiplication(
    phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    n_max: usize,
) -> Result<TruncationFamily> {
    let phi: RealFn = Arc::new(phi);
    check_multiplier(&phi, n_max.max(1))?;
    let gen_phi = phi.clone();
    let inv_phi = phi.clone();
    Ok(TruncationFamily::new(
        "mult-phi",
        "multiplication operator f -> phi f on L2[0,1], midpoint grid",
        move |n| {
            check_multiplier(&gen_phi, n)?;
            Operator::diagonal_real(&(0..n).map(|i| gen_phi(midpoint(i, n))).collect::<Vec<_>>())
        },
        Some(AnalyticAction::Multiplier(Arc::new(move |x| 1.0 / inv_phi(x)))),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub residual: f64,
    pub tail: f64,
}

/// Per-`n` residual between the truncated pseudoinverse action and the
/// analytic one, plus the analytic tail beyond `n`.
///
/// For sequence probes the distance is the ℓ² norm over the first `n`
/// coordinates and the tail is `(Σ_{k>n} |(T†y)_k|²)^{1/2}`, summed to
/// [`TAIL_CUTOFF`]. For function probes the discrete result is read as a
/// piecewise-constant function and compared in L²[0,1] by 5-point
/// Gauss-Legendre quadrature per cell; the tail is zero.
pub fn convergence_study(fam: &TruncationFamily, probe: &Probe, ns: &[usize]) -> Result<Vec<ConvergenceRecord>> {
    let action = fam
        .analytic_pinv_action
        .as_ref()
        .ok_or_else(|| Error::NoAnalyticAction(fam.name.clone()))?;
    match (action, probe) {
        (AnalyticAction::Coordinatewise(f), Probe::Sequence(y)) => {
            let tails = sequence_tails(f, y, ns);
            ns.iter()
                .zip(tails)
                .map(|(&n, tail)| {
                    let yn: Vec<C64> = (1..=n).map(|k| y(k)).collect();
                    let got = pinv_matrix(&fam.generate(n)?, None)?.matvec(&yn)?;
                    let diff: Vec<C64> = got.iter().enumerate().map(|(i, g)| g - f(i + 1, yn[i])).collect();
                    Ok(ConvergenceRecord {
                        n,
                        residual: vec_norm(&diff) + tail,
                        tail,
                    })
                })
                .collect()
        }
        (AnalyticAction::Multiplier(m), Probe::Function(y)) => ns
            .iter()
            .map(|&n| {
                let yn: Vec<C64> = (0..n).map(|i| C64::new(y(midpoint(i, n)), 0.0)).collect();
                let got = pinv_matrix(&fam.generate(n)?, None)?.matvec(&yn)?;
                let err = piecewise_l2_error(&got, |x| y(x) * m(x));
                Ok(ConvergenceRecord {
                    n,
                    residual: err,
                    tail: 0.0,
                })
            })
            .collect(),
        _ => Err(Error::ProbeMismatch(fam.name.clone())),
    }
}

/// Tail norms for every requested `n`, accumulated once from the cutoff
/// downwards so small terms are added first.
fn sequence_tails(f: &CoordinateMap, y: &Arc<dyn Fn(usize) -> C64 + Send + Sync>, ns: &[usize]) -> Vec<f64> {
    let mut wanted: Vec<usize> = ns.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut partial = std::collections::HashMap::new();
    let mut acc = 0.0f64;
    let mut next = wanted.len();
    for k in (1..=TAIL_CUTOFF).rev() {
        while next > 0 && wanted[next - 1] >= k {
            partial.insert(wanted[next - 1], acc);
            next -= 1;
        }
        acc += f(k, y(k)).norm_sqr();
    }
    while next > 0 {
        partial.insert(wanted[next - 1], 0.0);
        next -= 1;
    }
    ns.iter().map(|n| partial[n].sqrt()).collect()
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn piecewise_l2_error(values: &[C64], truth: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for (i, v) in values.iter().enumerate() {
        let center = midpoint(i, n);
        let cell: f64 = GAUSS_NODES
            .iter()
            .zip(GAUSS_WEIGHTS)
            .map(|(&t, w)| w * (v - C64::new(truth(center + 0.5 * h * t), 0.0)).norm_sqr())
            .sum();
        total += 0.5 * h * cell;
    }
    total.sqrt()
}

/// `true` when residuals never increase along the records.
pub fn is_non_increasing(records: &[ConvergenceRecord]) -> bool {
    records.windows(2).all(|w| w[1].residual <= w[0].residual)
}

/// Runs the whole identity registry on `fam.generate(n)`.
pub fn suite_on_truncation(fam: &TruncationFamily, n: usize, tol: f64) -> Result<Vec<IdentityReport>> {
    run_on_operator(&fam.generate(n)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbounded_family_truncations() {
        let f = family_diag_unbounded();
        assert_eq!(f.generate(3).unwrap(), Operator::diagonal_real(&[1.0, 2.0, 3.0]).unwrap());
        assert_eq!(f.generate(1).unwrap(), Operator::diagonal_real(&[1.0]).unwrap());
        assert_eq!(pinv_matrix(&f.generate(1).unwrap(), None).unwrap()[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn unbounded_family_action_on_inverse_index() {
        let f = family_diag_unbounded();
        let y = Vector::new((1..=5).map(|k| C64::new(1.0 / k as f64, 0.0)).collect());
        let got = f.analytic_pinv_apply(&y).unwrap();
        for (k, v) in got.iter().enumerate() {
            let k = (k + 1) as f64;
            assert!((v.re - 1.0 / (k * k)).abs() < 1e-16);
        }
    }

    #[test]
    fn kernel_family() {
        let f = family_diag_kernel();
        let t = f.generate(3).unwrap();
        assert_eq!(t, Operator::diagonal_real(&[0.0, 2.0, 3.0]).unwrap());
        let p = pinv_matrix(&t, None).unwrap();
        let expect = Operator::diagonal_real(&[0.0, 0.5, 1.0 / 3.0]).unwrap().materialize();
        assert!((&p - &expect).max_abs() < 1e-16);
        let zero = f.analytic_pinv_apply(&Vector::from_real(&[7.0, 0.0, 0.0])).unwrap();
        assert_eq!(zero, Vector::zeros(3));
        assert_eq!(p.matvec(&Vector::from_real(&[7.0, 0.0, 0.0])).unwrap(), Vector::zeros(3).into_inner());
    }

    #[test]
    fn multiplication_family_grid() {
        let f = family_multiplication(|x| 1.0 + x, 64).unwrap();
        let t = f.generate(4).unwrap();
        assert_eq!(t, Operator::diagonal_real(&[1.125, 1.375, 1.625, 1.875]).unwrap());
        let p = crate::pinv::pinv_by_definition(&t, 1e-12).unwrap();
        for (i, d) in [1.125, 1.375, 1.625, 1.875].iter().enumerate() {
            assert!((p[(i, i)].re - 1.0 / d).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_multiplier_is_identity() {
        let f = family_multiplication(|_| 1.0, 8).unwrap();
        assert_eq!(f.generate(5).unwrap(), Operator::identity(5).unwrap());
        assert_eq!(pinv_matrix(&f.generate(5).unwrap(), None).unwrap(), crate::Matrix::identity(5));
    }

    #[test]
    fn small_multiplier_is_rejected() {
        assert!(matches!(family_multiplication(|x| 0.5 + x, 8), Err(Error::MultiplierTooSmall { .. })));
        // Passes the coarse spot check, fails on a finer grid.
        let f = family_multiplication(|x| if x < 0.01 { 0.5 } else { 2.0 }, 2).unwrap();
        assert!(matches!(f.generate(100), Err(Error::MultiplierTooSmall { .. })));
    }

    #[test]
    fn finite_probe_is_exact() {
        let f = family_diag_kernel();
        let rec = convergence_study(&f, &Probe::finitely_supported(vec![1.0, 1.0, 1.0]), &[3, 5]).unwrap();
        for r in rec {
            assert!(r.residual < 1e-16 && r.tail == 0.0, "{r:?}");
        }
    }

    #[test]
    fn probe_kind_must_match() {
        assert!(matches!(
            convergence_study(&family_diag_unbounded(), &Probe::constant(1.0), &[4]),
            Err(Error::ProbeMismatch(_))
        ));
        let no_truth = TruncationFamily::new("bare", "", Operator::identity, None);
        assert!(matches!(
            convergence_study(&no_truth, &Probe::inverse_index(), &[4]),
            Err(Error::NoAnalyticAction(_))
        ));
    }

    #[test]
    fn multiplication_residual_shrinks_like_one_over_n() {
        let f = family_multiplication(|x| 1.0 + x, 64).unwrap();
        let rec = convergence_study(&f, &Probe::constant(1.0), &[8, 16, 32]).unwrap();
        assert!(is_non_increasing(&rec));
        for w in rec.windows(2) {
            let ratio = w[0].residual / w[1].residual;
            assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
        }
    }
}
