use lre_core::stats::{coeff_equality_test, fisher_z_ci_test, ols, residual_variance_test, Moments};
use lre_core::{EnvironmentData, LinearSem, VarSet};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const REPS: u64 = 2000;
const N: usize = 500;

fn pair_model(a: f64, v2: f64) -> LinearSem {
    LinearSem::from_edges(2, &[(0, 1, a)], vec![vec![1.0, v2]]).unwrap()
}

fn three_model(w: f64) -> LinearSem {
    LinearSem::from_edges(3, &[(0, 1, 0.6), (0, 2, w), (1, 2, 0.8)], vec![vec![1.0, 1.0, 1.5]]).unwrap()
}

fn sample(m: &LinearSem, n: usize, seed: u64) -> EnvironmentData {
    m.sample(0, n, seed).unwrap()
}

/// Largest gap between the empirical CDF of `ps` and the uniform CDF.
fn ks_uniform(mut ps: Vec<f64>) -> f64 {
    ps.sort_by(f64::total_cmp);
    let n = ps.len() as f64;
    ps.iter()
        .enumerate()
        .map(|(k, &u)| ((k as f64 + 1.0) / n - u).max(u - k as f64 / n))
        .fold(0.0, f64::max)
}

// 1% critical value of the one-sample KS statistic for 2000 draws.
const KS_CRIT: f64 = 1.63 / 44.721_359_549_995_8;

#[test]
fn coefficient_test_p_values_are_uniform_under_null() {
    for (s, y, m) in [
        (VarSet::singleton(0), 1, pair_model(1.1, 0.8)),
        (VarSet::from(&[0usize, 1][..]), 2, three_model(0.5)),
    ] {
        let ps: Vec<f64> = (0..REPS)
            .map(|r| {
                let fi = ols(&sample(&m, N, 2 * r), s, y).unwrap();
                let fj = ols(&sample(&m, N, 2 * r + 1), s, y).unwrap();
                coeff_equality_test(&fi, &fj, 0.05).unwrap().p_value
            })
            .collect();
        let d = ks_uniform(ps);
        assert!(d < KS_CRIT, "KS distance {d} for |S| = {}", s.len());
    }
}

#[test]
fn residual_variance_test_p_values_are_uniform_under_null() {
    let m = three_model(0.5);
    let ps: Vec<f64> = (0..REPS)
        .map(|r| {
            let s = VarSet::from(&[0usize, 1][..]);
            let fi = ols(&sample(&m, N, 10_000 + 2 * r), s, 2).unwrap();
            let fj = ols(&sample(&m, N, 10_001 + 2 * r), s, 2).unwrap();
            residual_variance_test(&fi, &fj, 0.05).unwrap().p_value
        })
        .collect();
    let d = ks_uniform(ps);
    assert!(d < KS_CRIT, "KS distance {d}");
}

#[test]
fn fisher_z_p_values_are_uniform_under_independence() {
    // x1 -> x2 -> x3: x1 and x3 are independent given x2.
    let m = LinearSem::from_edges(3, &[(0, 1, 0.9), (1, 2, 0.7)], vec![vec![1.0, 1.0, 1.0]]).unwrap();
    let ps: Vec<f64> = (0..REPS)
        .map(|r| {
            let data = sample(&m, N, 20_000 + r);
            let cov = data.gram() / N as f64;
            fisher_z_ci_test(&cov, 0, 2, VarSet::singleton(1), N, 0.05)
                .unwrap()
                .p_value
        })
        .collect();
    let d = ks_uniform(ps);
    assert!(d < KS_CRIT, "KS distance {d}");
}

#[test]
fn tests_have_power_against_real_changes() {
    let s = VarSet::singleton(0);
    let (mut coeff, mut resid) = (0, 0);
    for r in 0..200 {
        let fi = ols(&sample(&pair_model(1.0, 1.0), N, 30_000 + r), s, 1).unwrap();
        let fj = ols(&sample(&pair_model(1.4, 2.0), N, 40_000 + r), s, 1).unwrap();
        coeff += coeff_equality_test(&fi, &fj, 0.01).unwrap().reject as usize;
        resid += residual_variance_test(&fi, &fj, 0.01).unwrap().reject as usize;
    }
    assert!(coeff >= 190, "coefficient test rejected {coeff} of 200");
    assert!(resid >= 190, "variance test rejected {resid} of 200");
}

/// Statistic computed straight from the design matrices.
fn wald_by_hand(xi: &DMatrix<f64>, yi: &DVector<f64>, xj: &DMatrix<f64>, yj: &DVector<f64>) -> f64 {
    let fit = |x: &DMatrix<f64>, y: &DVector<f64>| {
        let xtx = x.transpose() * x;
        let inv = xtx.try_inverse().unwrap();
        let b = &inv * x.transpose() * y;
        let r = y - x * &b;
        let s2 = r.dot(&r) / (x.nrows() - x.ncols()) as f64;
        (b, inv * s2)
    };
    let (bi, vi) = fit(xi, yi);
    let (bj, vj) = fit(xj, yj);
    let d = bi - bj;
    let v = (vi + vj).try_inverse().unwrap();
    (d.transpose() * v * &d)[(0, 0)] / d.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_statistic_matches_direct_computation(seed in any::<u64>(), w in 0.1f64..1.5) {
        let m = three_model(w);
        let (ei, ej) = (sample(&m, 80, seed), sample(&three_model(w + 0.2), 60, seed ^ 7));
        let s = VarSet::from(&[0usize, 1][..]);
        let (fi, fj) = (ols(&ei, s, 2).unwrap(), ols(&ej, s, 2).unwrap());
        let t = coeff_equality_test(&fi, &fj, 0.05).unwrap();
        let cols = |e: &EnvironmentData| (e.samples().columns(0, 2).into_owned(), e.samples().column(2).into_owned());
        let ((xi, yi), (xj, yj)) = (cols(&ei), cols(&ej));
        let want = wald_by_hand(&xi, &yi, &xj, &yj);
        prop_assert!((t.statistic - want).abs() <= 1e-8 * want.max(1.0));
        prop_assert_eq!(t.df, (2.0, (80 - 2 + 60 - 2) as f64));
        let back = coeff_equality_test(&fj, &fi, 0.05).unwrap();
        prop_assert!((back.p_value - t.p_value).abs() < 1e-12);
    }

    #[test]
    fn variance_test_is_symmetric(seed in any::<u64>()) {
        let s = VarSet::singleton(0);
        let fi = ols(&sample(&pair_model(1.0, 1.0), 120, seed), s, 1).unwrap();
        let fj = ols(&sample(&pair_model(1.0, 1.4), 90, seed ^ 3), s, 1).unwrap();
        let a = residual_variance_test(&fi, &fj, 0.05).unwrap();
        let b = residual_variance_test(&fj, &fi, 0.05).unwrap();
        prop_assert!((a.p_value - b.p_value).abs() < 1e-9);
        prop_assert!((a.statistic * b.statistic - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_solves_normal_equations(seed in any::<u64>(), w in 0.1f64..1.5) {
        let data = sample(&three_model(w), 60, seed);
        let s = VarSet::from(&[0usize, 1][..]);
        let fit = ols(&data, s, 2).unwrap();
        let x = data.samples().columns(0, 2).into_owned();
        let y = data.samples().column(2).into_owned();
        let lhs = x.transpose() * &x * &fit.beta_hat;
        let rhs = x.transpose() * y;
        prop_assert!((lhs - &rhs).amax() <= 1e-8 * rhs.amax().max(1.0));
        let via_moments = Moments::from_data(&data).ols(s, 2).unwrap();
        prop_assert!((via_moments.beta_hat - &fit.beta_hat).amax() < 1e-10);
        prop_assert!((via_moments.s2 - fit.s2).abs() < 1e-10 * fit.s2.max(1.0));
    }
}
