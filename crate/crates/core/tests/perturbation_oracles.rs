use mpinv_core::identities::{instance_rng, sample_admissible_pair};
use mpinv_core::pinv::{operator_norm, pinv_matrix, subspace_eq, Decomposition};
use mpinv_core::{check_conditions, neumann_perturbed_pinv, perturbed_pinv, Error, Matrix, Operator, SUBSPACE_TOL, C64};
use rand::Rng;
use rand_distr::StandardNormal;

fn rel_tol(op: &Operator) -> Option<f64> {
    let s = operator_norm(op).unwrap();
    (s > 0.0).then_some(1e-8 * s)
}

fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest observed `‖Bx‖ / ‖Ax‖` over random directions.
fn sampled_ratio(a: &Matrix, b: &Matrix, samples: usize, rng: &mut impl Rng) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let x = random_vector(rng, a.cols());
        let ax = norm(&a.matvec(&x).unwrap());
        let bx = norm(&b.matvec(&x).unwrap());
        if ax > 1e-300 {
            best = best.max(bx / ax);
        }
    }
    best
}

#[test]
fn majorization_constants_match_sampling() {
    let mut rng = instance_rng(11, "sampling", 0);
    for (m, n, r) in [(2, 2, 1), (3, 2, 2), (2, 3, 2), (3, 3, 2), (3, 3, 3)] {
        for _ in 0..4 {
            let (t, s) = sample_admissible_pair(&mut rng, m, n, r, (0.1, 10.0), 0.5).unwrap();
            let c = check_conditions(&t, &s, SUBSPACE_TOL).unwrap();
            let (tm, sm) = (t.materialize(), s.materialize());
            let b = sampled_ratio(&tm, &sm, 10_000, &mut rng);
            let cc = sampled_ratio(&tm.adjoint(), &sm.adjoint(), 10_000, &mut rng);
            assert!(b <= c.s_t_dagger_norm * (1.0 + 1e-9), "b sample {b} > {}", c.s_t_dagger_norm);
            assert!(b >= 0.9 * c.s_t_dagger_norm, "b sample {b} << {}", c.s_t_dagger_norm);
            assert!(cc <= c.t_dagger_s_norm * (1.0 + 1e-9), "c sample {cc} > {}", c.t_dagger_s_norm);
            assert!(cc >= 0.9 * c.t_dagger_s_norm, "c sample {cc} << {}", c.t_dagger_s_norm);
        }
    }
}

#[test]
fn sampling_confirms_diagonal_example() {
    let t = Operator::diagonal_real(&[2.0, 0.0]).unwrap();
    let s = Operator::diagonal_real(&[0.5, 0.0]).unwrap();
    let mut rng = instance_rng(3, "diag", 0);
    let b = sampled_ratio(&t.materialize(), &s.materialize(), 10_000, &mut rng);
    assert!((b - 0.25).abs() < 1e-15, "{b}");
}

#[test]
fn kernel_violation_is_unbounded_under_sampling() {
    let t = Operator::diagonal_real(&[1.0, 0.0]).unwrap();
    let s = Operator::diagonal_real(&[0.0, 0.5]).unwrap();
    let mut rng = instance_rng(5, "unbounded", 0);
    assert!(sampled_ratio(&t.materialize(), &s.materialize(), 10_000, &mut rng) > 10.0);
    assert!(!check_conditions(&t, &s, SUBSPACE_TOL).unwrap().null_inclusion);
}

#[test]
fn closed_form_neumann_and_subspaces_over_random_pairs() {
    let mut rng = instance_rng(42, "perturbation-acceptance", 0);
    let mut checked = 0;
    while checked < 120 {
        let m = rng.random_range(1..=32);
        let n = rng.random_range(1..=32);
        let r = rng.random_range(0..=m.min(n));
        let (t, s) = sample_admissible_pair(&mut rng, m, n, r, (0.1, 10.0), 0.5).unwrap();
        let sum = Operator::Dense(&t.materialize() + &s.materialize());
        let direct = pinv_matrix(&sum, rel_tol(&sum)).unwrap();
        let closed = perturbed_pinv(&t, &s, SUBSPACE_TOL).unwrap().materialize();
        let err = (&closed - &direct).frobenius_norm() / (1.0 + direct.frobenius_norm());
        assert!(err <= 1e-9, "closed form off by {err} at {m}x{n} rank {r}");

        let series = neumann_perturbed_pinv(&t, &s, 500, 1e-13).unwrap();
        let gap = (&series.pinv.materialize() - &closed).frobenius_norm() / (1.0 + closed.frobenius_norm());
        assert!(gap <= 1e-9, "series off by {gap}");

        let dt = Decomposition::of(&t, rel_tol(&t)).unwrap();
        let ds = Decomposition::of(&sum, rel_tol(&sum)).unwrap();
        assert_eq!(dt.rank, ds.rank);
        assert!(subspace_eq(&dt.range(), &ds.range(), SUBSPACE_TOL).unwrap());
        assert!(subspace_eq(&dt.null(), &ds.null(), SUBSPACE_TOL).unwrap());
        checked += 1;
    }
}

#[test]
fn neumann_partial_sums_approach_closed_form_monotonically() {
    let mut rng = instance_rng(9, "neumann", 0);
    for _ in 0..10 {
        let (t, s) = sample_admissible_pair(&mut rng, 6, 5, 4, (0.1, 10.0), 0.5).unwrap();
        let closed = perturbed_pinv(&t, &s, SUBSPACE_TOL).unwrap().materialize();
        // Partial sums rebuilt independently of the library's loop.
        let t_dag = pinv_matrix(&t, None).unwrap();
        let step = (&t_dag * &s.materialize()).scale_real(-1.0);
        let mut term = t_dag.clone();
        let mut partial = t_dag;
        let mut prev = f64::INFINITY;
        for _ in 0..60 {
            let err = (&partial - &closed).frobenius_norm();
            if err < 1e-12 {
                break;
            }
            assert!(err <= prev, "error rose from {prev} to {err}");
            prev = err;
            term = &step * &term;
            partial = &partial + &term;
        }
        assert!(prev.is_finite());
    }
}

#[test]
fn refusals_are_deterministic() {
    let t = Operator::diagonal_real(&[1.0, 0.0]).unwrap();
    let s = Operator::diagonal_real(&[0.0, 0.5]).unwrap();
    for _ in 0..3 {
        assert!(matches!(perturbed_pinv(&t, &s, SUBSPACE_TOL), Err(Error::Inadmissible(_))));
    }
    let big = Operator::diagonal_real(&[1.0, 0.0]).unwrap();
    assert!(matches!(perturbed_pinv(&t, &big, SUBSPACE_TOL), Err(Error::Inadmissible(_))));
}
