mod common;

use common::*;
use rand::Rng;
use sparsechan::model::Scenario;
use sparsechan::sbl::fast::{
    apply_action, compute_sq_batch, propose_action, run, sparsity_quality, update_lambda, Action, ActionKind, FastSbl,
    SblState, StepOutcome,
};
use sparsechan::sbl::{PriorConfig, SblOptions};
use sparsechan::Complex64;

#[test]
fn empty_state_statistics() {
    let mut r = rng(1);
    let phi = random_dictionary(&mut r, 12, 20);
    let (y, _) = sparse_instance(&mut r, &phi, 2, 0.01);
    let st = SblState::empty(&phi, &y, 4.0);
    for l in 0..20 {
        let n2 = phi.column(l).norm_squared();
        assert!((st.s_cap[l] - 4.0 * n2).abs() < 1e-12 * n2);
        assert!((st.q_cap[l] - phi.column(l).dotc(&y) * 4.0).norm() < 1e-12);
    }
    assert!(state_error(&st, &phi, &y) < 1e-12);
}

#[test]
fn add_to_empty_state_matches_scalar_posterior() {
    let mut r = rng(2);
    let phi = random_dictionary(&mut r, 10, 15);
    let (y, _) = sparse_instance(&mut r, &phi, 2, 0.01);
    let lambda = 20.0;
    let mut st = SblState::empty(&phi, &y, lambda);
    let gamma = 0.7;
    apply_action(&mut st, &Action { kind: ActionKind::Add, index: 4, gamma, delta_ell: 0.0 }, &phi, &y).unwrap();
    let n2 = phi.column(4).norm_squared();
    let sigma = 1.0 / (lambda * n2 + 1.0 / gamma);
    assert!((st.sigma[(0, 0)].re - sigma).abs() < 1e-14);
    let mu = phi.column(4).dotc(&y) * (lambda * sigma);
    assert!((st.mu[0] - mu).norm() < 1e-12);
    assert!(state_error(&st, &phi, &y) < 1e-10);
}

#[test]
fn leave_one_out_s_equals_pre_add_capital_s() {
    let mut r = rng(3);
    let phi = random_dictionary(&mut r, 16, 24);
    let (y, _) = sparse_instance(&mut r, &phi, 3, 0.01);
    let mut st = SblState::from_active(&phi, &y, vec![1, 9], vec![0.4, 1.3], 30.0).unwrap();
    let before_s = st.s_cap[5];
    let before_q = st.q_cap[5];
    apply_action(&mut st, &Action { kind: ActionKind::Add, index: 5, gamma: 2.0, delta_ell: 0.0 }, &phi, &y).unwrap();
    let (s, q) = sparsity_quality(&st, 5).unwrap();
    assert!((s - before_s).abs() < 1e-9 * before_s);
    assert!((q - before_q).norm() < 1e-9 * before_q.norm());
}

#[test]
fn every_action_matches_batch_oracle() {
    let mut r = rng(4);
    for trial in 0..20 {
        let phi = random_dictionary(&mut r, 20, 40);
        let (y, _) = sparse_instance(&mut r, &phi, 5, 0.05);
        let active = vec![3, 11, 17, 25, 38];
        let gamma: Vec<f64> = (0..5).map(|_| r.random_range(0.05..3.0)).collect();
        let base = SblState::from_active(&phi, &y, active.clone(), gamma, 10.0).unwrap();
        assert!(state_error(&base, &phi, &y) < 1e-10, "trial {trial}: batch rebuild");

        let cases = [
            Action { kind: ActionKind::Add, index: 7, gamma: 0.8, delta_ell: 0.0 },
            Action { kind: ActionKind::Reestimate, index: 17, gamma: 5.0, delta_ell: 0.0 },
            Action { kind: ActionKind::Reestimate, index: 25, gamma: 0.01, delta_ell: 0.0 },
            Action { kind: ActionKind::Delete, index: 11, gamma: 0.0, delta_ell: 0.0 },
        ];
        for a in cases {
            let mut st = base.clone();
            apply_action(&mut st, &a, &phi, &y).unwrap();
            let err = state_error(&st, &phi, &y);
            assert!(err < 1e-8, "trial {trial} {:?}: rel err {err:.2e}", a.kind);
        }
    }
}

#[test]
fn delete_then_readd_restores_state() {
    let mut r = rng(5);
    let phi = random_dictionary(&mut r, 16, 30);
    let (y, _) = sparse_instance(&mut r, &phi, 3, 0.02);
    let base = SblState::from_active(&phi, &y, vec![2, 8, 20], vec![0.5, 1.5, 0.9], 25.0).unwrap();
    let mut st = base.clone();
    apply_action(&mut st, &Action { kind: ActionKind::Delete, index: 8, gamma: 0.0, delta_ell: 0.0 }, &phi, &y)
        .unwrap();
    assert_eq!(st.active, vec![2, 20]);
    apply_action(&mut st, &Action { kind: ActionKind::Add, index: 8, gamma: 1.5, delta_ell: 0.0 }, &phi, &y).unwrap();
    // same set, different order: compare through the oracle and the scattered mean
    assert!(state_error(&st, &phi, &y) < 1e-10);
    assert!(rel_err(st.alpha_full().as_slice(), base.alpha_full().as_slice()) < 1e-10);
    assert!(rel_err_real(&st.s_cap, &base.s_cap) < 1e-10);
    assert!(rel_err(&st.q_cap, &base.q_cap) < 1e-10);
}

#[test]
fn proposal_cases() {
    let mut r = rng(6);
    let phi = random_dictionary(&mut r, 16, 20);
    let (y, _) = sparse_instance(&mut r, &phi, 2, 0.01);
    let prior = PriorConfig::bessel_k();
    let empty = SblState::empty(&phi, &y, 100.0);
    let best = (0..20)
        .map(|l| propose_action(&empty, l, &prior).unwrap())
        .max_by(|a, b| a.delta_ell.total_cmp(&b.delta_ell))
        .unwrap();
    assert_eq!(best.kind, ActionKind::Add);
    assert!(best.delta_ell > 0.0);

    // a basis with no signal is never added
    let y0 = CVector::zeros(16);
    let st0 = SblState::empty(&phi, &y0, 100.0);
    let a = propose_action(&st0, 3, &prior).unwrap();
    assert_eq!((a.kind, a.delta_ell), (ActionKind::None, 0.0));

    // an active basis whose data vanished is deleted
    let st = SblState::from_active(&phi, &y0, vec![3], vec![1.0], 100.0).unwrap();
    let a = propose_action(&st, 3, &prior).unwrap();
    assert_eq!(a.kind, ActionKind::Delete);
    assert!(a.delta_ell > 0.0 || a.delta_ell.is_finite());
}

#[test]
fn compute_sq_batch_agrees_with_oracle() {
    let mut r = rng(7);
    let phi = random_dictionary(&mut r, 14, 22);
    let (y, _) = sparse_instance(&mut r, &phi, 3, 0.02);
    let st = SblState::from_active(&phi, &y, vec![0, 5, 21], vec![0.3, 2.0, 0.7], 40.0).unwrap();
    let (s, q) = compute_sq_batch(&y, &phi, &st);
    let (_, _, so, qo) = batch_oracle(&phi, &y, &st.active, &st.gamma, st.lambda);
    assert!(rel_err_real(&s, &so) < 1e-10);
    assert!(rel_err(&q, &qo) < 1e-10);
}

#[test]
fn lambda_update_cases() {
    let mut r = rng(8);
    let phi = random_dictionary(&mut r, 100, 10);
    let y = CVector::from_fn(100, |_, _| cn(&mut r, 0.1));
    let st = SblState::empty(&phi, &y, 1.0);
    assert!((update_lambda(&st, &y, &phi) - 100.0 / y.norm_squared()).abs() < 1e-12);
}

#[test]
fn lambda_trace_term_matches_posterior_sampling() {
    let mut r = rng(9);
    let phi = random_dictionary(&mut r, 20, 30);
    let (y, _) = sparse_instance(&mut r, &phi, 4, 0.1);
    let st = SblState::from_active(&phi, &y, vec![1, 4, 9, 22], vec![0.5, 0.2, 1.0, 0.05], 5.0).unwrap();
    let lambda = update_lambda(&st, &y, &phi);
    let expected_resid = 20.0 / lambda;

    // alpha_A ~ CN(mu, Sigma) via Cholesky of Sigma
    let chol = st.sigma.clone().cholesky().unwrap();
    let lfac = chol.l();
    let n = 100_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let z = CVector::from_fn(4, |_, _| cn(&mut r, 1.0));
        let a = &st.mu + &lfac * z;
        let mut fit = y.clone();
        for (j, &l) in st.active.iter().enumerate() {
            fit -= phi.column(l) * a[j];
        }
        acc += fit.norm_squared();
    }
    let mc = acc / n as f64;
    assert!((mc - expected_resid).abs() < 0.01 * expected_resid, "mc {mc} vs {expected_resid}");
}

#[test]
fn noiseless_single_tap_is_recovered() {
    let s = Scenario::scaled();
    let ofdm = s.ofdm().unwrap();
    let (dict, _) = s.dictionaries(&ofdm).unwrap();
    let phi = dict.entries;
    let y = phi.column(3).into_owned();
    let res = run(&y, &phi, &SblOptions::fast(PriorConfig::bessel_k())).unwrap();
    assert_eq!(res.support, vec![3]);
    assert!((res.alpha_hat[3] - Complex64::new(1.0, 0.0)).norm() < 1e-3, "{}", res.alpha_hat[3]);
    assert!(res.converged);
}

#[test]
fn zero_observation_gives_empty_model() {
    let mut r = rng(10);
    let phi = random_dictionary(&mut r, 10, 20);
    let y = CVector::zeros(10);
    let res = run(&y, &phi, &SblOptions::fast(PriorConfig::bessel_k())).unwrap();
    assert!(res.support.is_empty());
    assert!(res.converged);
    assert_eq!(res.iterations, 0);
    assert!(res.alpha_hat.iter().all(|a| a.norm() == 0.0));
}

#[test]
fn dimension_mismatch_is_an_error() {
    let mut r = rng(11);
    let phi = random_dictionary(&mut r, 10, 20);
    let y = CVector::zeros(9);
    assert!(run(&y, &phi, &SblOptions::fast(PriorConfig::bessel_k())).is_err());
}

#[test]
fn incremental_state_tracks_batch_and_objective_increases() {
    let mut r = rng(12);
    for prior in [PriorConfig::bessel_k(), PriorConfig::rvm(), PriorConfig::laplace(1.0).unwrap()] {
        for _ in 0..5 {
            let phi = random_dictionary(&mut r, 20, 40);
            let (y, _) = sparse_instance(&mut r, &phi, 4, 0.02);
            let mut eng = FastSbl::new(&phi, &y, SblOptions::fast(prior)).unwrap();
            assert!(state_error(eng.state(), &phi, &y) < 1e-8);
            while let StepOutcome::Applied(a) = eng.step().unwrap() {
                assert!(a.delta_ell >= 0.0);
                let err = state_error(eng.state(), &phi, &y);
                assert!(err < 1e-8, "{:?} iter {}: {err:.2e}", prior.kind, eng.state().iter);
            }
            let res = eng.finish();
            assert!(res.converged);
            assert_eq!(res.iterations, res.counts.adds + res.counts.deletes + res.counts.reestimates - 1);
        }
    }
}

#[test]
fn snapshots_follow_iterations() {
    let mut r = rng(13);
    let phi = random_dictionary(&mut r, 20, 40);
    let (y, _) = sparse_instance(&mut r, &phi, 4, 0.02);
    let mut opts = SblOptions::fast(PriorConfig::bessel_k());
    opts.record_snapshots = true;
    let res = run(&y, &phi, &opts).unwrap();
    assert_eq!(res.diagnostics.len(), res.iterations);
    let last = res.diagnostics.last().unwrap().snapshot.as_ref().unwrap();
    assert_eq!(last.len(), res.support.len());
    for &(l, v) in last {
        assert!((res.alpha_hat[l] - v).norm() < 1e-12);
    }
    assert!(res.diagnostics.iter().filter(|d| d.lambda_refreshed).count() == res.iterations / 3);
}
#[test]
fn all_positive_coefficients_have_no_root_at_extreme_scale() {
    use sparsechan::sbl::{solve_gamma_cubic, RootOutcome};
    for s in [1e3, 1e8, 1e13] {
        let out = solve_gamma_cubic(s, 0.0, &PriorConfig::bessel_k());
        assert_eq!(out, RootOutcome::NoPositiveRoot, "s = {s}");
    }
}
