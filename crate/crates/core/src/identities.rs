//! Catalog of pseudoinverse identities as residual checks, a seeded instance
//! generator, and the suite runner that turns both into reports.
//!
//! Every equality residual is `‖X − Y‖_F / (1 + max(‖X‖_F, ‖Y‖_F))`. Subspace
//! entries report the spectral distance between orthogonal projectors and are
//! judged at no less than [`SUBSPACE_TOL`]. Inclusions between operators are
//! checked as equalities: every domain here is the whole space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::algebra::{abs_pinv_identities, gamma_min_check, norm_max_check_with_tol, pinv_direct_sum_residual};
use crate::error::{Error, Result};
use crate::matrix::{normalized_residual, Matrix, C64};
use crate::operator::{direct_sum, direct_sum_n, Operator};
use crate::perturbation::perturbed_pinv;
use crate::pinv::{gamma, operator_norm, pinv_by_definition, pinv_matrix, projector_distance, Decomposition, Subspace, SUBSPACE_TOL};
use crate::svd::{spectral_norm, svd};

/// Rank cut used inside identity evaluation, relative to `σ_max`.
const RANK_RTOL: f64 = 1e-8;

/// Dimension schedule cycled through by the suite.
pub const DEFAULT_DIMS: [(usize, usize); 5] = [(2, 2), (3, 5), (5, 3), (8, 8), (12, 7)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RankPolicy {
    /// Rank drawn uniformly from `0..=min(m, n)`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_dim: usize,
    pub rank_policy: RankPolicy,
    pub sigma_range: (f64, f64),
    pub dims: Vec<(usize, usize)>,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            seed: 42,
            trials: 50,
            max_dim: 32,
            rank_policy: RankPolicy::Uniform,
            sigma_range: (0.1, 10.0),
            dims: DEFAULT_DIMS.to_vec(),
        }
    }
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.sigma_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma_range ({lo}, {hi}) needs 0 < min <= max < inf")));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig("empty dimension schedule".into()));
        }
        for &(m, n) in &self.dims {
            if m == 0 || n == 0 || m.max(n) > self.max_dim {
                return Err(Error::InvalidConfig(format!(
                    "dimension {m}x{n} outside 1..={}",
                    self.max_dim
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Arity {
    /// One operator `T`.
    Single,
    /// Two operators combined by direct sum.
    Pair,
    /// An operator and an admissible perturbation.
    Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IdentityKind {
    Equality,
    Subspace,
    /// Holds trivially when every domain is the whole space.
    Vacuous,
}

/// Operands of one evaluation; `other` is `T₂` for pairs and `S` for
/// perturbations.
#[derive(Debug, Clone)]
pub struct Operands {
    pub t: Operator,
    pub other: Option<Operator>,
}

impl Operands {
    pub fn single(t: Operator) -> Self {
        Operands { t, other: None }
    }

    pub fn pair(t: Operator, other: Operator) -> Self {
        Operands { t, other: Some(other) }
    }

    fn second(&self) -> Result<&Operator> {
        self.other
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("identity needs two operands".into()))
    }
}

pub type ResidualFn = fn(&Operands) -> Result<f64>;

#[derive(Clone)]
pub struct IdentitySpec {
    pub id: &'static str,
    pub description: &'static str,
    pub arity: Arity,
    /// The identity in symbols.
    pub statement: &'static str,
    pub kind: IdentityKind,
    /// Lower bound on the rank of every generated operand.
    pub min_rank: usize,
    pub residual: ResidualFn,
}

impl std::fmt::Debug for IdentitySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentitySpec")
            .field("id", &self.id)
            .field("arity", &self.arity)
            .field("kind", &self.kind)
            .field("statement", &self.statement)
            .finish()
    }
}

impl IdentitySpec {
    /// Pass threshold for a requested suite tolerance.
    pub fn effective_tol(&self, tol: f64) -> f64 {
        match self.kind {
            IdentityKind::Subspace => tol.max(SUBSPACE_TOL),
            _ => tol,
        }
    }

    /// Residual with evaluation errors mapped to infinity.
    pub fn evaluate(&self, ops: &Operands) -> f64 {
        match (self.residual)(ops) {
            Ok(r) if r.is_nan() => f64::INFINITY,
            Ok(r) => r,
            Err(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub trials: usize,
    pub dims: Vec<(usize, usize)>,
    /// Infinite (serialized as `null`) when an evaluation failed.
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub reports: Vec<IdentityReport>,
    /// No trial ran, so every verdict is empty.
    pub vacuous: bool,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

// ---------------------------------------------------------------------------
// Dense helpers

fn dense(m: Matrix) -> Operator {
    Operator::Dense(m)
}

fn rank_tol(x: &Matrix) -> Result<Option<f64>> {
    let s = spectral_norm(x)?;
    Ok(if s == 0.0 { None } else { Some(RANK_RTOL * s) })
}

fn pv(x: &Matrix) -> Result<Matrix> {
    pinv_matrix(&dense(x.clone()), rank_tol(x)?)
}

fn def(x: &Matrix) -> Result<Matrix> {
    let tol = rank_tol(x)?.unwrap_or(f64::EPSILON);
    pinv_by_definition(&dense(x.clone()), tol)
}

fn decomposition(x: &Matrix) -> Result<Decomposition> {
    Decomposition::of(&dense(x.clone()), rank_tol(x)?)
}

fn range_of(x: &Matrix) -> Result<Subspace> {
    Ok(decomposition(x)?.range())
}

fn null_of(x: &Matrix) -> Result<Subspace> {
    Ok(decomposition(x)?.null())
}

fn carrier_of(x: &Matrix) -> Result<Subspace> {
    Ok(decomposition(x)?.carrier())
}

fn res(x: &Matrix, y: &Matrix) -> f64 {
    normalized_residual(x, y)
}

fn dist(a: &Subspace, b: &Subspace) -> Result<f64> {
    projector_distance(a, b)
}

fn mat(ops: &Operands) -> (Matrix, Matrix) {
    let t = ops.t.materialize();
    let ta = t.adjoint();
    (t, ta)
}

// ---------------------------------------------------------------------------
// Single-operator residuals

fn r_null_pinv(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    let p = pv(&t)?;
    let d = dist(&null_of(&p)?, &null_of(&ta)?)?;
    // R(T) ⊕ N(T*) exhausts the codomain.
    let split = &(&range_of(&t)?.projector() + &null_of(&ta)?.projector()) - &Matrix::identity(t.rows());
    Ok(d.max(spectral_norm(&split)?))
}

fn r_range_pinv(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    dist(&range_of(&pv(&t)?)?, &carrier_of(&t)?)
}

fn r_pinv_t(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    Ok(res(&(&p * &t), &range_of(&p)?.projector()))
}

fn r_t_pinv(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    Ok(res(&(&t * &p), &range_of(&t)?.projector()))
}

fn r_involution(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    Ok(res(&pv(&pv(&t)?)?, &t))
}

fn r_adjoint_commutes(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&pv(&ta)?, &pv(&t)?.adjoint()))
}

fn r_null_adj_pinv(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    dist(&null_of(&pv(&ta)?)?, &null_of(&t)?)
}

fn r_gram_pinv(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&pv(&(&ta * &t))?, &(&pv(&t)? * &pv(&ta)?)))
}

fn r_cogram_pinv(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&pv(&(&t * &ta))?, &(&pv(&ta)? * &pv(&t)?)))
}

fn r_def_adjoint(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&def(&t)?.adjoint(), &def(&ta)?))
}

fn r_def_involution(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    Ok(res(&def(&def(&t)?)?, &t))
}

fn r_symmetric(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    let pt = &p * &t;
    let tp = &t * &p;
    Ok(res(&pt, &pt.adjoint()).max(res(&tp, &tp.adjoint())))
}

fn r_range_null_pt(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    let pt = &p * &t;
    Ok(dist(&range_of(&p)?, &range_of(&pt)?)?.max(dist(&null_of(&t)?, &null_of(&pt)?)?))
}

fn r_range_null_tp(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    let tp = &t * &p;
    Ok(dist(&range_of(&t)?, &range_of(&tp)?)?.max(dist(&null_of(&p)?, &null_of(&tp)?)?))
}

fn r_carrier_chain(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    let c = carrier_of(&t)?;
    Ok(dist(&range_of(&pv(&t)?)?, &c)?.max(dist(&c, &range_of(&ta)?)?))
}

fn r_def_gram(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&def(&(&ta * &t))?, &(&def(&t)? * &def(&ta)?)))
}

fn r_def_cogram(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&def(&(&t * &ta))?, &(&def(&ta)? * &def(&t)?)))
}

fn r_adj_cogram(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&(&ta * &pv(&(&t * &ta))?), &pv(&t)?))
}

fn r_gram_adj(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&(&pv(&(&ta * &t))? * &ta), &pv(&t)?))
}

fn r_vacuous(_: &Operands) -> Result<f64> {
    Ok(0.0)
}

fn r_ranges_of_products(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    Ok(dist(&range_of(&(&t * &p))?, &range_of(&t)?)?.max(dist(&range_of(&(&p * &t))?, &range_of(&p)?)?))
}

fn r_t_factor_right(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&t, &(&(&t * &ta) * &pv(&ta)?)))
}

fn r_t_factor_left(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&t, &(&(&pv(&ta)? * &ta) * &t)))
}

fn r_pinv_adj_left(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    let pa = p.adjoint();
    Ok(res(&pa, &(&(&t * &p) * &pa)))
}

fn r_pinv_adj_right(ops: &Operands) -> Result<f64> {
    let t = ops.t.materialize();
    let p = pv(&t)?;
    let pa = p.adjoint();
    Ok(res(&(&(&pa * &p) * &t), &pa))
}

fn r_adj_projected(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    let pt = &pv(&t)? * &t;
    Ok(res(&ta, &(&pt.adjoint() * &ta)))
}

fn r_adj_through_pinv(ops: &Operands) -> Result<f64> {
    let (t, ta) = mat(ops);
    Ok(res(&ta, &(&(&pv(&t)? * &t) * &ta)))
}

// ---------------------------------------------------------------------------
// Direct-sum and perturbation residuals

fn sum_tol(t1: &Operator, t2: &Operator) -> Result<Option<f64>> {
    rank_tol(&direct_sum(t1, t2).materialize())
}

fn r_blockwise_pinv(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    pinv_direct_sum_residual(t1, t2, sum_tol(t1, t2)?)
}

fn triple(ops: &Operands) -> Result<Vec<Operator>> {
    Ok(vec![ops.t.clone(), ops.second()?.clone(), ops.t.adjoint()])
}

fn r_blockwise_pinv_n(ops: &Operands) -> Result<f64> {
    let parts = triple(ops)?;
    let whole = direct_sum_n(&parts).expect("non-empty").materialize();
    let tol = rank_tol(&whole)?;
    let blocks: Vec<Operator> = parts
        .iter()
        .map(|p| Ok(dense(pinv_matrix(p, tol)?)))
        .collect::<Result<_>>()?;
    let blockwise = direct_sum_n(&blocks).expect("non-empty").materialize();
    Ok(res(&pinv_matrix(&dense(whole), tol)?, &blockwise))
}

fn r_sum_adjoint(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    let s = direct_sum(t1, t2);
    let structural = s.adjoint().materialize();
    let blockwise = direct_sum(&t1.adjoint(), &t2.adjoint()).materialize();
    let dense_adj = s.materialize().adjoint();
    Ok(res(&structural, &dense_adj).max(res(&blockwise, &dense_adj)))
}

fn r_sum_pinv_adjoint(ops: &Operands) -> Result<f64> {
    let s = direct_sum(&ops.t, ops.second()?).materialize();
    Ok(res(&pv(&s)?.adjoint(), &pv(&s.adjoint())?))
}

fn r_sum_pinv_adjoint_n(ops: &Operands) -> Result<f64> {
    let s = direct_sum_n(&triple(ops)?).expect("non-empty").materialize();
    Ok(res(&pv(&s)?.adjoint(), &pv(&s.adjoint())?))
}

fn r_gamma_min(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    let tol = sum_tol(t1, t2)?;
    let g = gamma(&direct_sum(t1, t2), tol)?;
    Ok(gamma_min_check(t1, t2, tol)? / (1.0 + g))
}

fn r_norm_max(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    let tol = sum_tol(t1, t2)?;
    let norm = operator_norm(&dense(pinv_matrix(&direct_sum(t1, t2), tol)?))?;
    Ok(norm_max_check_with_tol(t1, t2, tol)? / (1.0 + norm))
}

fn r_abs_of_pinv(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    Ok(abs_pinv_identities(t1, t2, sum_tol(t1, t2)?)?.0)
}

fn r_pinv_of_abs(ops: &Operands) -> Result<f64> {
    let (t1, t2) = (&ops.t, ops.second()?);
    Ok(abs_pinv_identities(t1, t2, sum_tol(t1, t2)?)?.1)
}

fn r_perturbed(ops: &Operands) -> Result<f64> {
    let (t, s) = (&ops.t, ops.second()?);
    let closed = perturbed_pinv(t, s, SUBSPACE_TOL)?.materialize();
    let direct = pv(&(&t.materialize() + &s.materialize()))?;
    Ok(res(&closed, &direct))
}

// ---------------------------------------------------------------------------
// Catalog

macro_rules! spec {
    ($id:literal, $arity:ident, $kind:ident, $rank:literal, $f:ident, $stmt:literal, $desc:literal) => {
        IdentitySpec {
            id: $id,
            description: $desc,
            arity: Arity::$arity,
            statement: $stmt,
            kind: IdentityKind::$kind,
            min_rank: $rank,
            residual: $f,
        }
    };
}

/// All identities, sorted by id.
pub fn registry() -> Vec<IdentitySpec> {
    let mut r = vec![
        spec!("thm-1.4-1", Single, Vacuous, 0, r_vacuous, "T† closed", "pseudoinverse is closed; automatic for matrices"),
        spec!("thm-1.4-2", Single, Subspace, 0, r_null_pinv, "N(T†) = N(T*), R(T) ⊕ N(T*) = K", "kernel of the pseudoinverse and the domain split"),
        spec!("thm-1.4-3", Single, Subspace, 0, r_range_pinv, "R(T†) = C(T)", "range of the pseudoinverse is the carrier"),
        spec!("thm-1.4-4", Single, Equality, 0, r_pinv_t, "T†T = P_R(T†)", "T†T projects onto the range of T†"),
        spec!("thm-1.4-5", Single, Equality, 0, r_t_pinv, "TT† = P_R(T)", "TT† projects onto the range of T"),
        spec!("thm-1.4-6", Single, Equality, 0, r_involution, "(T†)† = T", "pseudoinversion is an involution"),
        spec!("thm-1.4-7", Single, Equality, 0, r_adjoint_commutes, "(T*)† = (T†)*", "adjoint commutes with pseudoinversion"),
        spec!("thm-1.4-8", Single, Subspace, 0, r_null_adj_pinv, "N((T*)†) = N(T)", "kernel of the adjoint's pseudoinverse"),
        spec!("thm-1.4-9", Single, Equality, 0, r_gram_pinv, "(T*T)† = T†(T*)†", "pseudoinverse of the Gram operator"),
        spec!("thm-1.4-10", Single, Equality, 0, r_cogram_pinv, "(TT*)† = (T*)†T†", "pseudoinverse of the co-Gram operator"),
        spec!("thm-2.2", Single, Equality, 0, r_def_adjoint, "(T†)* = (T*)†", "adjoint commutation through the defining construction"),
        spec!("thm-2.3", Single, Equality, 0, r_def_involution, "(T†)† = T", "involution through the defining construction"),
        spec!("prop-2.4", Single, Equality, 0, r_symmetric, "(T†T)* = T†T, (TT†)* = TT†", "both products are self-adjoint"),
        spec!("thm-2.5", Single, Subspace, 0, r_range_null_pt, "R(T†) = R(T†T), N(T) = N(T†T)", "range and kernel through T†T"),
        spec!("thm-2.5-2", Single, Subspace, 0, r_range_null_tp, "R(T) = R(TT†), N(T†) = N(TT†)", "range and kernel through TT†"),
        spec!("thm-2.5-3", Single, Subspace, 0, r_carrier_chain, "R(T†) = C(T) = N(T)⊥ = R(T*)", "carrier chain"),
        spec!("thm-2.6", Single, Equality, 0, r_def_gram, "(T*T)† = T†(T*)†", "Gram pseudoinverse, defining construction"),
        spec!("thm-2.7", Single, Equality, 0, r_def_cogram, "(TT*)† = (T*)†T†", "co-Gram pseudoinverse, defining construction"),
        spec!("cor-2.8", Single, Equality, 0, r_adj_cogram, "T*(TT*)† = T†", "pseudoinverse through the co-Gram operator"),
        spec!("cor-2.9", Single, Equality, 0, r_gram_adj, "(T*T)†T* = T†", "pseudoinverse through the Gram operator"),
        spec!("thm-2.10-1", Single, Vacuous, 0, r_vacuous, "D(TT†) = D(T†), D(T†T) = D(T)", "domain equalities; every domain is the whole space"),
        spec!("thm-2.10-2", Single, Subspace, 0, r_ranges_of_products, "R(TT†) = R(T), R(T†T) = R(T†)", "ranges of the two products"),
        spec!("thm-2.10-3", Single, Subspace, 0, r_null_adj_pinv, "N(T) = N((T*)†)", "kernel through the adjoint's pseudoinverse"),
        spec!("thm-2.11", Single, Equality, 0, r_t_factor_right, "T = TT*(T*)†", "right factorization of T"),
        spec!("thm-2.12", Single, Equality, 0, r_t_factor_left, "T = (T*)†T*T", "left factorization of T"),
        spec!("thm-2.13", Single, Equality, 0, r_pinv_adj_left, "(T†)* = TT†(T†)*", "range projector fixes (T†)*"),
        spec!("thm-2.14", Single, Equality, 0, r_pinv_adj_right, "(T†)*T†T = (T†)*", "carrier projector fixes (T†)*"),
        spec!("thm-2.15", Single, Equality, 0, r_adj_projected, "T* = (T†T)*T*", "adjoint of T†T fixes T*"),
        spec!("thm-2.16", Single, Equality, 0, r_adj_through_pinv, "T* = T†TT*", "T†T fixes T*"),
        spec!("thm-3.1", Pair, Equality, 0, r_blockwise_pinv, "(T₁ ⊕ T₂)† = T₁† ⊕ T₂†", "pseudoinverse of a direct sum is blockwise"),
        spec!("cor-3.2", Pair, Equality, 0, r_blockwise_pinv_n, "(T₁ ⊕ T₂ ⊕ T₁*)† = T₁† ⊕ T₂† ⊕ (T₁*)†", "blockwise pseudoinverse of a threefold sum"),
        spec!("lem-3.3", Pair, Equality, 0, r_sum_adjoint, "(T₁ ⊕ T₂)* = T₁* ⊕ T₂*", "adjoint of a direct sum is blockwise"),
        spec!("cor-3.4", Pair, Equality, 0, r_sum_pinv_adjoint, "((T₁ ⊕ T₂)†)* = ((T₁ ⊕ T₂)*)†", "adjoint commutation on a direct sum"),
        spec!("rem-3.5", Pair, Equality, 0, r_sum_pinv_adjoint_n, "((T₁ ⊕ T₂ ⊕ T₁*)†)* = ((T₁ ⊕ T₂ ⊕ T₁*)*)†", "adjoint commutation on a threefold sum"),
        spec!("cor-3.6", Pair, Equality, 1, r_gamma_min, "γ(T₁ ⊕ T₂) = min(γ(T₁), γ(T₂))", "reduced minimum modulus of a direct sum"),
        spec!("eq-12-13", Pair, Equality, 0, r_norm_max, "‖T₁† ⊕ T₂†‖ = max(‖T₁†‖, ‖T₂†‖)", "norm of a blockwise pseudoinverse"),
        spec!("thm-3.7", Pair, Equality, 0, r_abs_of_pinv, "|(T₁ ⊕ T₂)†| = |T₁†| ⊕ |T₂†|", "absolute value of the pseudoinverse of a sum"),
        spec!("cor-3.8", Pair, Equality, 0, r_pinv_of_abs, "|T₁ ⊕ T₂|† = |T₁|† ⊕ |T₂|† = |((T₁ ⊕ T₂)*)†|", "pseudoinverse of the absolute value of a sum"),
        spec!("thm-3.10", Perturbation, Equality, 0, r_perturbed, "(T + S)† = (I + T†S)⁻¹T†", "pseudoinverse of an admissible perturbation"),
    ];
    r.sort_by(|a, b| a.id.cmp(b.id));
    r
}

pub fn lookup(id: &str) -> Option<IdentitySpec> {
    registry().into_iter().find(|s| s.id == id)
}

// ---------------------------------------------------------------------------
// Instances

/// Independent generator for `(seed, label, index)`.
pub fn instance_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    // FNV-1a over the label, then a splitmix64 finalizer over the mix.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h.rotate_left(17) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `n x n` unitary from Gram-Schmidt (two passes) on a complex Gaussian matrix.
fn random_unitary(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for b in &cols {
                let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (c, x) in v.iter_mut().zip(b) {
                    *c -= proj * x;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // A draw this close to the span has probability zero; redraw anyway.
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    Matrix::from_columns(n, &cols)
}

/// `U Σ V*` with `rank` singular values log-uniform in `sigma_range`.
pub fn sample_operator(
    rng: &mut impl Rng,
    m: usize,
    n: usize,
    rank: usize,
    sigma_range: (f64, f64),
) -> Result<Operator> {
    if m == 0 || n == 0 || rank > m.min(n) {
        return Err(Error::InvalidRank { rank, rows: m, cols: n });
    }
    let u = random_unitary(rng, m);
    let v = random_unitary(rng, n);
    let (lo, hi) = (sigma_range.0.ln(), sigma_range.1.ln());
    let mut us = Matrix::zeros(m, n);
    for k in 0..rank {
        let s = if hi > lo { rng.random_range(lo..=hi).exp() } else { sigma_range.0 };
        for i in 0..m {
            us[(i, k)] = u[(i, k)] * s;
        }
    }
    Ok(Operator::Dense(&us * &v.adjoint()))
}

/// Deterministic in `(cfg.seed, m, n, rank)`.
pub fn random_operator(cfg: &InstanceConfig, m: usize, n: usize, rank: usize) -> Result<Operator> {
    let index = ((m as u64) << 40) ^ ((n as u64) << 20) ^ rank as u64;
    sample_operator(&mut instance_rng(cfg.seed, "random_operator", index), m, n, rank, cfg.sigma_range)
}

/// `T` as in [`sample_operator`] and `S = ε·S₀ / max(1, ‖S₀T†‖, ‖T†S₀‖)` with
/// `S₀ = T C T†T`, `‖C‖ = 1` and `ε` uniform in `(0.05, eps_max]`. The right
/// factor `T†T` puts `N(T)` inside `N(S)`, the left factor `T` puts `R(S)`
/// inside `R(T)`, and the scaling keeps both norms at most `eps_max`.
pub fn sample_admissible_pair(
    rng: &mut impl Rng,
    m: usize,
    n: usize,
    rank: usize,
    sigma_range: (f64, f64),
    eps_max: f64,
) -> Result<(Operator, Operator)> {
    let t = sample_operator(rng, m, n, rank, sigma_range)?;
    let tm = t.materialize();
    let t_dag = pinv_matrix(&t, rank_tol(&tm)?)?;
    let c = Matrix::from_fn(n, n, |_, _| gaussian(rng));
    let c = c.scale_real(1.0 / svd(&c)?.largest());
    let s0 = &(&tm * &c) * &(&t_dag * &tm);
    let b = spectral_norm(&(&s0 * &t_dag))?;
    let cc = spectral_norm(&(&t_dag * &s0))?;
    let eps = 0.05 + (eps_max - 0.05) * (1.0 - rng.random::<f64>());
    let s = s0.scale_real(eps / b.max(cc).max(1.0));
    Ok((t, Operator::Dense(s)))
}

fn draw_rank(rng: &mut impl Rng, m: usize, n: usize, min_rank: usize) -> usize {
    let hi = m.min(n);
    rng.random_range(min_rank.min(hi)..=hi)
}

fn operands_for(spec: &IdentitySpec, cfg: &InstanceConfig, trial: usize) -> Result<(Operands, (usize, usize))> {
    let mut rng = instance_rng(cfg.seed, spec.id, trial as u64);
    let (m, n) = cfg.dims[trial % cfg.dims.len()];
    let rank = draw_rank(&mut rng, m, n, spec.min_rank);
    match spec.arity {
        Arity::Single => Ok((Operands::single(sample_operator(&mut rng, m, n, rank, cfg.sigma_range)?), (m, n))),
        Arity::Pair => {
            let (m2, n2) = cfg.dims[(trial + 1) % cfg.dims.len()];
            let rank2 = draw_rank(&mut rng, m2, n2, spec.min_rank);
            let t1 = sample_operator(&mut rng, m, n, rank, cfg.sigma_range)?;
            let t2 = sample_operator(&mut rng, m2, n2, rank2, cfg.sigma_range)?;
            Ok((Operands::pair(t1, t2), (m + m2, n + n2)))
        }
        Arity::Perturbation => {
            let (t, s) = sample_admissible_pair(&mut rng, m, n, rank, cfg.sigma_range, 0.5)?;
            Ok((Operands::pair(t, s), (m, n)))
        }
    }
}

fn push_dim(dims: &mut Vec<(usize, usize)>, d: (usize, usize)) {
    if !dims.contains(&d) {
        dims.push(d);
    }
}

/// Evaluates every registry entry over `cfg.trials` seeded instances.
/// Evaluation failures count as infinite residuals; they fail the entry
/// without aborting the run.
pub fn run_suite(cfg: &InstanceConfig, tol: f64) -> Result<SuiteOutcome> {
    cfg.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if cfg.trials == 0 {
        return Ok(SuiteOutcome {
            reports: Vec::new(),
            vacuous: true,
        });
    }
    let reports = registry()
        .iter()
        .map(|spec| {
            let mut dims = Vec::new();
            let mut worst: f64 = 0.0;
            for trial in 0..cfg.trials {
                let r = match operands_for(spec, cfg, trial) {
                    Ok((ops, d)) => {
                        push_dim(&mut dims, d);
                        spec.evaluate(&ops)
                    }
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(r);
            }
            let tol = spec.effective_tol(tol);
            IdentityReport {
                id: spec.id.to_string(),
                trials: cfg.trials,
                dims,
                max_residual: worst,
                tol,
                pass: worst <= tol,
                seed: cfg.seed,
            }
        })
        .collect();
    Ok(SuiteOutcome { reports, vacuous: false })
}

/// Evaluates every registry entry once on `op`: pairs use `(op, op)` and the
/// perturbation entry uses `S = op/4`.
pub fn run_on_operator(op: &Operator, tol: f64) -> Result<Vec<IdentityReport>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(registry()
        .iter()
        .map(|spec| {
            let (ops, d) = match spec.arity {
                Arity::Single => (Operands::single(op.clone()), op.shape()),
                Arity::Pair => (Operands::pair(op.clone(), op.clone()), (2 * op.rows(), 2 * op.cols())),
                Arity::Perturbation => (Operands::pair(op.clone(), op.scale(C64::new(0.25, 0.0))), op.shape()),
            };
            let r = spec.evaluate(&ops);
            let tol = spec.effective_tol(tol);
            IdentityReport {
                id: spec.id.to_string(),
                trials: 1,
                dims: vec![d],
                max_residual: r,
                tol,
                pass: r <= tol,
                seed: 0,
            }
        })
        .collect())
}
