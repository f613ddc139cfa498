mod common;

use common::*;
use lre_core::sem::{perturb_environment, random_sem, InvarianceCheck, RandomSemConfig};
use lre_core::{LinearSem, VarSet};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(seed: u64, p: usize) -> (LinearSem, Edges) {
    random_model(p, 0.5, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn with_second_env(sem: &LinearSem, changed: VarSet, seed: u64) -> LinearSem {
    perturb_environment(sem, changed, (0.5, 2.0), 0.3, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mixing_matrix_inverts_i_minus_b(seed in any::<u64>(), p in 1usize..9) {
        let (sem, _) = model(seed, p);
        let a = sem.mixing_matrix().unwrap();
        let prod = &a * (DMatrix::identity(p, p) - sem.coefficients());
        prop_assert!((prod - DMatrix::<f64>::identity(p, p)).amax() < 1e-10);
    }

    #[test]
    fn regression_agrees_with_covariance_route(seed in any::<u64>(), p in 2usize..7, mask in any::<u32>(), y in 0usize..7) {
        let y = y % p;
        let s: Vec<usize> = (0..p).filter(|&v| v != y && mask >> v & 1 == 1).collect();
        prop_assume!(!s.is_empty());
        let (sem, _) = model(seed, p);
        let cov = covariance(sem.coefficients(), sem.noise_vars(0));
        prop_assert!((sem.covariance(0).unwrap() - &cov).amax() < 1e-10 * cov.amax().max(1.0));
        let got = sem.population_regression(0, varset(&s), y).unwrap();
        let want = cov_regression(&cov, &s, y);
        prop_assert!((got - want).amax() < 1e-10);
        let rv = sem.residual_variance(0, varset(&s), y).unwrap();
        prop_assert!((rv - cov_residual_variance(&cov, &s, y)).abs() < 1e-10);
    }

    #[test]
    fn regression_on_parents_is_the_weight_row(seed in any::<u64>(), p in 2usize..8) {
        let (sem, edges) = model(seed, p);
        for y in 0..p {
            let pa = varset(&edges.iter().filter(|e| e.1 == y).map(|e| e.0).collect::<Vec<_>>()).to_vec();
            if pa.is_empty() {
                continue;
            }
            let beta = sem.population_regression(0, varset(&pa), y).unwrap();
            for (k, &v) in pa.iter().enumerate() {
                prop_assert!((beta[k] - sem.weight(v, y)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn perturbation_moves_only_changed_variances(seed in any::<u64>(), mask in 0u64..64) {
        let cfg = RandomSemConfig { p: 6, ..Default::default() };
        let sem = random_sem(&cfg, seed).unwrap();
        let changed = VarSet::from_bits(mask);
        let two = perturb_environment(&sem, changed, cfg.var_range, 0.1, seed ^ 1).unwrap();
        prop_assert_eq!(two.n_envs(), 2);
        prop_assert_eq!(two.changed_between(0, 1), changed);
        for k in changed.iter() {
            let (a, b) = (two.noise_vars(0)[k], two.noise_vars(1)[k]);
            prop_assert!((a - b).abs() >= 0.1 - 1e-12);
            prop_assert!((cfg.var_range.0..=cfg.var_range.1).contains(&b));
        }
    }
}

#[test]
fn random_dag_edge_count_matches_density() {
    let cfg = RandomSemConfig::default();
    let draws = 1000;
    let total: usize = (0..draws).map(|s| random_sem(&cfg, s).unwrap().dag().n_edges()).sum();
    let mean = total as f64 / draws as f64;
    // 45 forward pairs at probability 0.25.
    assert!((mean - 11.25).abs() < 0.5, "mean edge count {mean}");
}

#[test]
fn random_sem_parameters_stay_in_range() {
    let cfg = RandomSemConfig::default();
    for s in 0..200 {
        let sem = random_sem(&cfg, s).unwrap();
        for (i, j) in sem.dag().edges() {
            let w = sem.weight(i, j);
            assert!((0.1..=2.0).contains(&w), "{w}");
        }
        assert!(sem.noise_vars(0).iter().all(|v| (0.1..=4.0).contains(v)));
        assert_eq!(random_sem(&cfg, s).unwrap(), sem);
    }
}

#[test]
fn sample_covariance_approaches_population() {
    let (sem, _) = model(3, 5);
    let data = sem.sample(0, 200_000, 9).unwrap();
    let n = data.n() as f64;
    let emp = data.gram() / n;
    let pop = covariance(sem.coefficients(), sem.noise_vars(0));
    let rel = (emp - &pop).amax() / pop.amax();
    assert!(rel < 0.03, "relative deviation {rel}");
    assert_eq!(
        sem.sample(0, 50, 9).unwrap().samples(),
        sem.sample(0, 50, 9).unwrap().samples()
    );
    assert_ne!(
        sem.sample(0, 50, 9).unwrap().samples(),
        sem.sample(0, 50, 10).unwrap().samples()
    );
}

#[test]
fn model_json_round_trips_exactly() {
    let (sem, _) = model(17, 6);
    let two = with_second_env(&sem, VarSet::from(&[1usize, 4][..]), 2);
    assert_eq!(LinearSem::from_json(&two.to_json()).unwrap(), two);
}

#[test]
fn jacobian_agrees_with_multi_point_invariance() {
    let check = InvarianceCheck::default();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut mismatches = Vec::new();
    for m in 0..200 {
        let (sem, _) = random_model(4, 0.6, &mut rng);
        let changed = VarSet::from_bits(rng.random_range(1u64..16));
        for (y, s) in full_pairs(4) {
            let s = varset(&s);
            let jac = sem.regression_jacobian(0, s, y, changed).unwrap();
            let beta = sem.population_regression(0, s, y).unwrap();
            let flat = jac.amax() <= 1e-8 * beta.amax().max(1.0);
            if flat != sem.is_invariant_under(0, changed, s, y, &check).unwrap() {
                mismatches.push((m, y, s));
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
}

#[test]
fn jacobian_matches_analytic_two_variable_case() {
    // x1 -> x2 with weight a: regressing x1 on x2 gives a v1 / (a² v1 + v2).
    let (a, v1, v2) = (1.3, 0.7, 1.9);
    let sem = LinearSem::from_edges(2, &[(0, 1, a)], vec![vec![v1, v2]]).unwrap();
    let jac = sem
        .regression_jacobian(0, VarSet::singleton(1), 0, VarSet::from(&[0usize, 1][..]))
        .unwrap();
    let d = a * a * v1 + v2;
    let d_v1 = a * v2 / (d * d);
    let d_v2 = -a * v1 / (d * d);
    assert!((jac[(0, 0)] - d_v1).abs() < 1e-8);
    assert!((jac[(0, 1)] - d_v2).abs() < 1e-8);
}

/// A parent's coefficient on its child is invariant only when the child's
/// coefficient on the parent is.
#[test]
fn single_regressor_orientation_property() {
    let check = InvarianceCheck::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counterexamples = 0;
    for _ in 0..500 {
        let p = rng.random_range(2..=6);
        let (sem, edges) = random_model(p, 0.5, &mut rng);
        let changed = VarSet::from_bits(rng.random_range(0..1u64 << p));
        for &(x, y) in &edges {
            let x_on_y = sem
                .is_invariant_under(0, changed, VarSet::singleton(y), x, &check)
                .unwrap();
            let y_on_x = sem
                .is_invariant_under(0, changed, VarSet::singleton(x), y, &check)
                .unwrap();
            if x_on_y && !y_on_x {
                counterexamples += 1;
            }
        }
    }
    assert_eq!(counterexamples, 0);
}

/// Residual variance on the parents is unchanged exactly when the target's
/// own noise is; and a changed noise shows in every invariant neighbor
/// regression.
#[test]
fn residual_variance_tracks_noise_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counterexamples = Vec::new();
    for m in 0..500 {
        let p = rng.random_range(2..=6);
        let (sem, edges) = random_model(p, 0.5, &mut rng);
        let changed = VarSet::from_bits(rng.random_range(0..1u64 << p));
        let two = with_second_env(&sem, changed, m);
        let cov = [
            covariance(two.coefficients(), two.noise_vars(0)),
            covariance(two.coefficients(), two.noise_vars(1)),
        ];
        for y in 0..p {
            let pa: Vec<usize> = edges.iter().filter(|e| e.1 == y).map(|e| e.0).collect();
            let rv = |s: &[usize], e: usize| {
                if s.is_empty() {
                    cov[e][(y, y)]
                } else {
                    cov_residual_variance(&cov[e], s, y)
                }
            };
            let same_on_parents = (rv(&pa, 0) - rv(&pa, 1)).abs() < 1e-9;
            if same_on_parents == changed.contains(y) {
                counterexamples.push((m, y, "parents"));
            }
            if !changed.contains(y) {
                continue;
            }
            // Every neighbor subset with invariant coefficients has moving
            // residual variance.
            let nb: Vec<usize> = edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == y {
                        Some(b)
                    } else if b == y {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            for sub in subsets(nb.len()) {
                let s: Vec<usize> = sub.iter().map(|&k| nb[k]).collect();
                let inv =
                    s.is_empty() || (cov_regression(&cov[0], &s, y) - cov_regression(&cov[1], &s, y)).amax() < 1e-9;
                if inv && (rv(&s, 0) - rv(&s, 1)).abs() < 1e-9 {
                    counterexamples.push((m, y, "neighbors"));
                }
            }
        }
    }
    assert!(counterexamples.is_empty(), "{counterexamples:?}");
}
