use mpinv_core::algebra::abs_op;
use mpinv_core::identities::{instance_rng, sample_operator};
use mpinv_core::pinv::{gamma, operator_norm, penrose_defect, pinv_matrix, subspace_eq, Decomposition};
use mpinv_core::{direct_sum, direct_sum_n, normalized_residual, Matrix, Operator};
use proptest::prelude::*;

/// Conditioned instance: spectrum in `[0.1, 10]`, any rank.
fn instance(max: usize) -> impl Strategy<Value = Operator> {
    (any::<u64>(), 1..=max, 1..=max, 0.0..=1.0f64).prop_map(|(seed, m, n, frac)| {
        let rank = (frac * m.min(n) as f64).round() as usize;
        sample_operator(&mut instance_rng(seed, "prop", 0), m, n, rank, (0.1, 10.0)).unwrap()
    })
}

fn full_rank(max: usize) -> impl Strategy<Value = Operator> {
    (any::<u64>(), 1..=max, 1..=max, 0.0..=1.0f64).prop_map(|(seed, m, n, frac)| {
        let rank = 1 + (frac * (m.min(n) - 1) as f64).round() as usize;
        sample_operator(&mut instance_rng(seed, "prop+", 0), m, n, rank, (0.1, 10.0)).unwrap()
    })
}

fn tol_for(op: &Operator) -> Option<f64> {
    let s = operator_norm(op).unwrap();
    (s > 0.0).then_some(1e-8 * s)
}

fn p(op: &Operator) -> Matrix {
    pinv_matrix(op, tol_for(op)).unwrap()
}

fn dense(m: Matrix) -> Operator {
    Operator::Dense(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn penrose_equations(op in instance(16)) {
        let a = op.materialize();
        prop_assert!(penrose_defect(&a, &p(&op)) <= 1e-10);
    }

    #[test]
    fn involution(op in instance(16)) {
        let a = op.materialize();
        let back = p(&dense(p(&op)));
        prop_assert!(normalized_residual(&back, &a) <= 1e-9);
    }

    #[test]
    fn adjoint_commutes(op in instance(16)) {
        prop_assert!(normalized_residual(&p(&op.adjoint()), &p(&op).adjoint()) <= 1e-10);
    }

    #[test]
    fn products_are_hermitian(op in instance(16)) {
        let a = op.materialize();
        let pa = p(&op);
        let s = 1.0 + a.frobenius_norm() * pa.frobenius_norm();
        prop_assert!((&pa * &a).hermitian_defect() <= 1e-12 * s);
        prop_assert!((&a * &pa).hermitian_defect() <= 1e-12 * s);
    }

    #[test]
    fn range_and_null_bookkeeping(op in instance(12)) {
        let a = op.materialize();
        let pa = p(&op);
        let dec = |x: &Matrix| { let o = dense(x.clone()); Decomposition::of(&o, tol_for(&o)).unwrap() };
        let (t, td, ptt, ttp) = (dec(&a), dec(&pa), dec(&(&pa * &a)), dec(&(&a * &pa)));
        let adj_p = dec(&p(&op.adjoint()));
        let tol = 1e-8;
        prop_assert!(subspace_eq(&ptt.null(), &t.null(), tol).unwrap());
        prop_assert!(subspace_eq(&ttp.range(), &t.range(), tol).unwrap());
        prop_assert!(subspace_eq(&ttp.null(), &td.null(), tol).unwrap());
        prop_assert!(subspace_eq(&ptt.range(), &td.range(), tol).unwrap());
        prop_assert!(subspace_eq(&adj_p.null(), &t.null(), tol).unwrap());
    }

    #[test]
    fn gamma_is_reciprocal_of_pinv_norm(op in full_rank(16)) {
        let g = gamma(&op, tol_for(&op)).unwrap();
        let n = operator_norm(&dense(p(&op))).unwrap();
        prop_assert!((g * n - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn square_of_abs_pinv(op in instance(12)) {
        // (|T*|²)† = (|T*|†)²
        let abs_adj = abs_op(&op).unwrap().abs_adj;
        let sq = &abs_adj.materialize() * &abs_adj.materialize();
        let lhs = p(&dense(sq));
        let ap = p(&abs_adj);
        let rhs = &ap * &ap;
        prop_assert!(normalized_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn pinv_of_abs_is_abs_of_adjoint_pinv(op in instance(12)) {
        // |T|† = |(T*)†|
        let abs = abs_op(&op).unwrap().abs;
        let lhs = p(&abs);
        let rhs = abs_op(&dense(p(&op.adjoint()))).unwrap().abs.materialize();
        prop_assert!(normalized_residual(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn adjoint_commutes_on_sums(a in instance(8), b in instance(8)) {
        let s = direct_sum(&a, &b);
        prop_assert_eq!(s.adjoint().materialize(), direct_sum(&a.adjoint(), &b.adjoint()).materialize());
        let whole = s.materialize();
        let w = dense(whole.clone());
        let tol = tol_for(&w);
        let lhs = pinv_matrix(&w, tol).unwrap().adjoint();
        let rhs = pinv_matrix(&dense(whole.adjoint()), tol).unwrap();
        prop_assert!(normalized_residual(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn gamma_of_sum_is_min(a in full_rank(8), b in full_rank(8)) {
        let s = direct_sum(&a, &b);
        let tol = tol_for(&s);
        let g = gamma(&s, tol).unwrap();
        let m = gamma(&a, tol).unwrap().min(gamma(&b, tol).unwrap());
        prop_assert!((g - m).abs() <= 1e-10 * m);
    }

    #[test]
    fn n_fold_blockwise_pinv(parts in prop::collection::vec(instance(6), 1..=5)) {
        let whole = direct_sum_n(&parts).unwrap();
        let tol = tol_for(&whole);
        let blocks: Vec<Operator> = parts.iter().map(|t| dense(pinv_matrix(t, tol).unwrap())).collect();
        let lhs = pinv_matrix(&dense(whole.materialize()), tol).unwrap();
        prop_assert!(normalized_residual(&lhs, &direct_sum_n(&blocks).unwrap().materialize()) <= 1e-9);
    }
}
