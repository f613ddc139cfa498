//! Population regression coefficients and the Jacobian criterion for
//! regression invariance.
//!
//! `β_S(Y) = (A_S Λ A_Sᵀ)⁻¹ A_S Λ A_Yᵀ` is a rational function of the noise
//! variances on the diagonal of `Λ`. A pair `(Y, S)` is invariant under a
//! change set `I` when the Jacobian columns for the `Λ` entries in `I` vanish
//! identically. That is decided numerically: `β_S(Y)` is compared at the
//! model's variances and at several random rescalings of the entries in `I`.
//! For generic parameters a nonzero rational function cannot vanish at all
//! of those points.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinearSem;
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::invariance::{RegressionInvarianceSet, Scope};
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceCheck {
    /// Number of random perturbation points.
    pub perturbations: usize,
    /// Largest relative change still counted as no change.
    pub rel_tol: f64,
    pub seed: u64,
}

impl Default for InvarianceCheck {
    fn default() -> Self {
        InvarianceCheck {
            perturbations: 5,
            rel_tol: 1e-7,
            seed: 0x1f2e_3d4c,
        }
    }
}

/// Regression of `y` on `s` given the mixing matrix and noise variances.
pub(crate) fn regression_from_mixing(a: &DMatrix<f64>, lambda: &[f64], s: VarSet, y: usize) -> Result<DVector<f64>> {
    let idx = s.to_vec();
    let k = idx.len();
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    let p = a.ncols();
    // A_S Λ, row by row.
    let scaled = DMatrix::from_fn(k, p, |r, c| a[(idx[r], c)] * lambda[c]);
    let a_s = DMatrix::from_fn(k, p, |r, c| a[(idx[r], c)]);
    let gram = &scaled * a_s.transpose();
    let rhs = DVector::from_fn(k, |r, _| (0..p).map(|c| scaled[(r, c)] * a[(y, c)]).sum());
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::DegenerateModel(format!("covariance of regressors {:?} is singular", idx)))?;
    Ok(chol.solve(&rhs))
}

fn max_rel_diff(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - b).amax() / scale
}

impl LinearSem {
    fn check_pair(&self, s: VarSet, y: usize) -> Result<()> {
        let p = self.p();
        if y >= p || s.iter().any(|v| v >= p) {
            return Err(Error::InvalidRequest(format!(
                "variable index out of range for p = {p}"
            )));
        }
        if s.contains(y) {
            return Err(Error::InvalidRequest(format!("target {y} is among its own regressors")));
        }
        Ok(())
    }

    /// Population least-squares coefficients of `y` on `s` in `env`.
    pub fn population_regression(&self, env: usize, s: VarSet, y: usize) -> Result<DVector<f64>> {
        self.check_env(env)?;
        self.check_pair(s, y)?;
        regression_from_mixing(&self.mixing_matrix()?, self.noise_vars(env), s, y)
    }

    /// `E[(Y - X_S β_S(Y))²]` in `env`.
    pub fn residual_variance(&self, env: usize, s: VarSet, y: usize) -> Result<f64> {
        let beta = self.population_regression(env, s, y)?;
        let cov = self.covariance(env)?;
        let explained: f64 = s.iter().zip(beta.iter()).map(|(v, b)| b * cov[(v, y)]).sum();
        Ok(cov[(y, y)] - explained)
    }

    /// Central finite-difference Jacobian of `β_S(Y)` with respect to the
    /// noise variances in `wrt`, one column per member of `wrt` in index
    /// order. Steps are `1e-5` relative to each variance.
    pub fn regression_jacobian(&self, env: usize, s: VarSet, y: usize, wrt: VarSet) -> Result<DMatrix<f64>> {
        self.check_env(env)?;
        self.check_pair(s, y)?;
        let a = self.mixing_matrix()?;
        let base = self.noise_vars(env).to_vec();
        let mut jac = DMatrix::zeros(s.len(), wrt.len());
        for (col, k) in wrt.iter().enumerate() {
            let h = 1e-5 * base[k];
            let mut up = base.clone();
            up[k] += h;
            let mut down = base.clone();
            down[k] -= h;
            let diff = (regression_from_mixing(&a, &up, s, y)? - regression_from_mixing(&a, &down, s, y)?) / (2.0 * h);
            jac.set_column(col, &diff);
        }
        Ok(jac)
    }

    /// Whether `β_S(Y)` in `env` is unaffected by changing the noise
    /// variances of `changed`.
    pub fn is_invariant_under(
        &self,
        env: usize,
        changed: VarSet,
        s: VarSet,
        y: usize,
        check: &InvarianceCheck,
    ) -> Result<bool> {
        self.check_env(env)?;
        self.check_pair(s, y)?;
        let a = self.mixing_matrix()?;
        let points = perturbation_points(self.noise_vars(env), changed, check);
        invariant_at(&a, self.noise_vars(env), &points, s, y, check.rel_tol)
    }

    /// Population invariance set of this model's structure and parameters
    /// in `env` when the noises in `changed` are perturbed.
    pub fn invariance_set(
        &self,
        env: usize,
        changed: VarSet,
        scope: &Scope,
        check: &InvarianceCheck,
    ) -> Result<RegressionInvarianceSet> {
        self.check_env(env)?;
        let pairs = scope.pairs(self.p());
        self.invariance_set_on(env, changed, &pairs, check)
    }

    /// As [`LinearSem::invariance_set`] over an explicit pair list.
    pub fn invariance_set_on(
        &self,
        env: usize,
        changed: VarSet,
        pairs: &[(usize, VarSet)],
        check: &InvarianceCheck,
    ) -> Result<RegressionInvarianceSet> {
        self.check_env(env)?;
        let a = self.mixing_matrix()?;
        let base = self.noise_vars(env);
        let points = perturbation_points(base, changed, check);
        let mut out = RegressionInvarianceSet::new(self.p());
        for &(y, s) in pairs {
            self.check_pair(s, y)?;
            let inv = changed.is_empty() || invariant_at(&a, base, &points, s, y, check.rel_tol)?;
            out.record(y, s, inv);
        }
        Ok(out)
    }

    /// Invariance between two of this model's environments, comparing the
    /// population coefficients directly.
    pub fn invariance_between(
        &self,
        env_i: usize,
        env_j: usize,
        scope: &Scope,
        rel_tol: f64,
    ) -> Result<RegressionInvarianceSet> {
        self.check_env(env_i)?;
        self.check_env(env_j)?;
        let a = self.mixing_matrix()?;
        let mut out = RegressionInvarianceSet::new(self.p());
        for (y, s) in scope.pairs(self.p()) {
            let bi = regression_from_mixing(&a, self.noise_vars(env_i), s, y)?;
            let bj = regression_from_mixing(&a, self.noise_vars(env_j), s, y)?;
            out.record(y, s, max_rel_diff(&bi, &bj) <= rel_tol);
        }
        Ok(out)
    }

    /// Variables whose noise variance differs between two environments.
    pub fn changed_between(&self, env_i: usize, env_j: usize) -> VarSet {
        let (a, b) = (self.noise_vars(env_i), self.noise_vars(env_j));
        (0..self.p()).filter(|&k| a[k] != b[k]).collect()
    }
}

fn perturbation_points(base: &[f64], changed: VarSet, check: &InvarianceCheck) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    (0..check.perturbations)
        .map(|_| {
            let mut v = base.to_vec();
            for k in changed.iter() {
                // Factor in [e^-1.1, e^-0.4] ∪ [e^0.4, e^1.1], well away from 1.
                let mag: f64 = rng.random_range(0.4..1.1);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                v[k] *= (sign * mag).exp();
            }
            v
        })
        .collect()
}

fn invariant_at(
    a: &DMatrix<f64>,
    base: &[f64],
    points: &[Vec<f64>],
    s: VarSet,
    y: usize,
    rel_tol: f64,
) -> Result<bool> {
    let b0 = regression_from_mixing(a, base, s, y)?;
    for pt in points {
        let b = regression_from_mixing(a, pt, s, y)?;
        if max_rel_diff(&b0, &b) > rel_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A model on `dag` with generic parameters: coefficients uniform in
/// `[0.5, 1.5]`, noise variances uniform in `[0.5, 2]`, one environment.
pub fn generic_sem(dag: &Dag, seed: u64) -> LinearSem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize, f64)> = dag
        .edges()
        .into_iter()
        .map(|(i, j)| (i, j, rng.random_range(0.5..1.5)))
        .collect();
    let vars: Vec<f64> = (0..dag.p()).map(|_| rng.random_range(0.5..2.0)).collect();
    LinearSem::from_edges(dag.p(), &edges, vec![vars]).expect("DAG support is acyclic")
}

const GENERIC_SEED: u64 = 0x0005_eed0_fda6;

/// `R(G, I)`: the structural invariance set of `dag`, evaluated at a fixed
/// generic parameter point.
pub fn population_invariance_set(dag: &Dag, changed: VarSet, scope: &Scope) -> RegressionInvarianceSet {
    population_invariance_set_on(dag, changed, &scope.pairs(dag.p()))
}

/// As [`population_invariance_set`] over an explicit pair list.
pub fn population_invariance_set_on(dag: &Dag, changed: VarSet, pairs: &[(usize, VarSet)]) -> RegressionInvarianceSet {
    generic_sem(dag, GENERIC_SEED)
        .invariance_set_on(0, changed, pairs, &InvarianceCheck::default())
        .expect("generic models have nonsingular covariances")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2(a: f64, v1: f64, v2: f64) -> LinearSem {
        LinearSem::from_edges(2, &[(0, 1, a)], vec![vec![v1, v2]]).unwrap()
    }

    #[test]
    fn effect_on_cause_is_the_edge_weight() {
        let m = chain2(2.0, 1.0, 1.0);
        let b = m.population_regression(0, VarSet::singleton(0), 1).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cause_on_effect_closed_form() {
        // a σ1² / (a² σ1² + σ2²) = 2 / 5
        let m = chain2(2.0, 1.0, 1.0);
        let b = m.population_regression(0, VarSet::singleton(1), 0).unwrap();
        assert!((b[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn independent_variables_have_zero_coefficient() {
        let m = LinearSem::from_edges(2, &[], vec![vec![1.0, 3.0]]).unwrap();
        let b = m.population_regression(0, VarSet::singleton(1), 0).unwrap();
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn rejects_target_in_regressors() {
        let m = chain2(1.0, 1.0, 1.0);
        assert!(m.population_regression(0, VarSet::from(&[0, 1][..]), 0).is_err());
    }

    #[test]
    fn two_variable_invariance() {
        let dag = Dag::new(2, &[(0, 1)]).unwrap();
        let r = population_invariance_set(&dag, VarSet::from(&[0, 1][..]), &Scope::Full);
        assert!(r.contains(1, VarSet::singleton(0)));
        assert!(!r.contains(0, VarSet::singleton(1)));
    }

    #[test]
    fn nothing_changed_means_everything_invariant() {
        let dag = Dag::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = population_invariance_set(&dag, VarSet::EMPTY, &Scope::Full);
        assert_eq!(r.len(), r.n_tested());
        assert_eq!(r.n_tested(), 9);
    }

    #[test]
    fn chain_with_root_change() {
        let dag = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let r = population_invariance_set(&dag, VarSet::singleton(0), &Scope::Full);
        let one = VarSet::singleton;
        assert!(r.contains(1, one(0)));
        assert!(!r.contains(0, one(1)));
        assert!(r.contains(2, one(1)));
        assert!(!r.contains(1, one(2)));
    }

    #[test]
    fn jacobian_matches_analytic_derivative() {
        // β = a σ1² / (a² σ1² + σ2²); ∂β/∂σ2² = -a σ1² / (a² σ1² + σ2²)²
        let (a, v1, v2) = (1.5, 0.7, 2.0);
        let m = chain2(a, v1, v2);
        let j = m
            .regression_jacobian(0, VarSet::singleton(1), 0, VarSet::from(&[0, 1][..]))
            .unwrap();
        let d = a * a * v1 + v2;
        let d_v1 = a * v2 / (d * d);
        let d_v2 = -a * v1 / (d * d);
        assert!((j[(0, 0)] - d_v1).abs() < 1e-8);
        assert!((j[(0, 1)] - d_v2).abs() < 1e-8);
    }
}
