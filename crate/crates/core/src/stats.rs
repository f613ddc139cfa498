//! Least squares without intercept and the tests built on it: equality of
//! regression coefficients, equality of residual variances, and the Fisher-z
//! partial-correlation test.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};

use crate::error::{Error, Result};
use crate::sem::EnvironmentData;
use crate::varset::VarSet;

/// Cholesky pivots below this fraction of the largest diagonal entry are
/// treated as collinearity.
const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    pub beta_hat: DVector<f64>,
    /// `X_Sᵀ X_S`.
    pub gram: DMatrix<f64>,
    /// Residual sum of squares over `n - |S|`.
    pub s2: f64,
    pub n: usize,
    pub regressors: VarSet,
    pub target: usize,
}

impl OlsFit {
    /// Residual degrees of freedom.
    pub fn df(&self) -> usize {
        self.n - self.regressors.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub df: (f64, f64),
    pub corrected_alpha: f64,
}

impl TestOutcome {
    fn new(statistic: f64, p_value: f64, df: (f64, f64), corrected_alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestOutcome {
            statistic,
            p_value,
            reject: p_value < corrected_alpha,
            df,
            corrected_alpha,
        }
    }
}

fn validate_pair(p: usize, n: usize, s: VarSet, y: usize) -> Result<()> {
    if y >= p || s.iter().any(|v| v >= p) {
        return Err(Error::InvalidRequest(format!(
            "variable index out of range for p = {p}"
        )));
    }
    if s.contains(y) {
        return Err(Error::InvalidRequest(format!("target {y} is among its own regressors")));
    }
    if n <= s.len() {
        return Err(Error::InsufficientSamples(format!(
            "{n} samples for {} regressors",
            s.len()
        )));
    }
    Ok(())
}

fn solve_normal(gram: &DMatrix<f64>, rhs: &DVector<f64>, target: usize) -> Result<DVector<f64>> {
    if gram.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    let max_diag = gram.diagonal().max();
    let chol = gram.clone().cholesky().ok_or(Error::SingularDesign { target })?;
    let l = chol.l_dirty();
    let min_pivot = (0..gram.nrows())
        .map(|k| l[(k, k)] * l[(k, k)])
        .fold(f64::INFINITY, f64::min);
    if !(max_diag > 0.0) || min_pivot <= COLLINEAR_TOL * max_diag {
        return Err(Error::SingularDesign { target });
    }
    Ok(chol.solve(rhs))
}

/// Least squares of column `y` on columns `s`, no intercept.
/// With `s` empty the prediction is zero and `s2 = ‖Y‖² / n`.
pub fn ols(data: &EnvironmentData, s: VarSet, y: usize) -> Result<OlsFit> {
    let (n, p) = (data.n(), data.p());
    validate_pair(p, n, s, y)?;
    let x = data.samples();
    let idx = s.to_vec();
    let xs = x.select_columns(&idx);
    let yv = x.column(y).into_owned();
    let gram = xs.tr_mul(&xs);
    let beta_hat = solve_normal(&gram, &xs.tr_mul(&yv), y)?;
    let resid = &yv - &xs * &beta_hat;
    let s2 = resid.norm_squared() / (n - idx.len()) as f64;
    Ok(OlsFit {
        beta_hat,
        gram,
        s2,
        n,
        regressors: s,
        target: y,
    })
}

/// Sufficient statistics `XᵀX` and `n` of one environment. Regressions from
/// moments cost O(|S|³) instead of O(n |S|²).
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub xtx: DMatrix<f64>,
}

impl Moments {
    pub fn from_data(data: &EnvironmentData) -> Self {
        Moments {
            n: data.n(),
            xtx: data.gram(),
        }
    }

    pub fn p(&self) -> usize {
        self.xtx.nrows()
    }

    /// Same estimator as [`ols`], computed from the cross-product matrix.
    pub fn ols(&self, s: VarSet, y: usize) -> Result<OlsFit> {
        validate_pair(self.p(), self.n, s, y)?;
        let idx = s.to_vec();
        let k = idx.len();
        let gram = DMatrix::from_fn(k, k, |r, c| self.xtx[(idx[r], idx[c])]);
        let xty = DVector::from_fn(k, |r, _| self.xtx[(idx[r], y)]);
        let beta_hat = solve_normal(&gram, &xty, y)?;
        let rss = (self.xtx[(y, y)] - beta_hat.dot(&xty)).max(0.0);
        Ok(OlsFit {
            beta_hat,
            gram,
            s2: rss / (self.n - k) as f64,
            n: self.n,
            regressors: s,
            target: y,
        })
    }

    /// Moments of several environments added together.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Moments>) -> Option<Moments> {
        let mut iter = parts.into_iter();
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, m| Moments {
            n: acc.n + m.n,
            xtx: acc.xtx + &m.xtx,
        }))
    }
}

fn check_same_regression(fi: &OlsFit, fj: &OlsFit) -> Result<()> {
    if fi.regressors != fj.regressors || fi.target != fj.target {
        return Err(Error::Contract(format!(
            "({}, {:?}) vs ({}, {:?})",
            fi.target, fi.regressors, fj.target, fj.regressors
        )));
    }
    Ok(())
}

/// F-test of `β_S^(i)(Y) = β_S^(j)(Y)`.
///
/// The statistic is `dᵀ (s_i² Σ_i⁻¹ + s_j² Σ_j⁻¹)⁻¹ d / |S|` with
/// `d = β̂_i - β̂_j`, referred to `F(|S|, n_i + n_j - 2|S|)`.
pub fn coeff_equality_test(fi: &OlsFit, fj: &OlsFit, corrected_alpha: f64) -> Result<TestOutcome> {
    check_same_regression(fi, fj)?;
    let k = fi.regressors.len();
    let df2 = (fi.df() + fj.df()) as f64;
    if k == 0 {
        return Ok(TestOutcome::new(0.0, 1.0, (0.0, df2), corrected_alpha));
    }
    let d = &fi.beta_hat - &fj.beta_hat;
    if d.iter().all(|x| *x == 0.0) {
        return Ok(TestOutcome::new(0.0, 1.0, (k as f64, df2), corrected_alpha));
    }
    let inv = |g: &DMatrix<f64>| {
        g.clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or(Error::SingularDesign { target: fi.target })
    };
    let v = inv(&fi.gram)? * fi.s2 + inv(&fj.gram)? * fj.s2;
    let chol = v.cholesky().ok_or(Error::NoiselessFit)?;
    let stat = d.dot(&chol.solve(&d)) / k as f64;
    let f = FisherSnedecor::new(k as f64, df2).map_err(|e| Error::InvalidRequest(e.to_string()))?;
    Ok(TestOutcome::new(stat, f.sf(stat), (k as f64, df2), corrected_alpha))
}

/// Two-sided F-test of equal residual variances, statistic `s_i² / s_j²`
/// on `(n_i - |S|, n_j - |S|)` degrees of freedom.
pub fn residual_variance_test(fi: &OlsFit, fj: &OlsFit, corrected_alpha: f64) -> Result<TestOutcome> {
    check_same_regression(fi, fj)?;
    if !(fj.s2 > 0.0) {
        return Err(Error::NoiselessFit);
    }
    let df = (fi.df() as f64, fj.df() as f64);
    let stat = fi.s2 / fj.s2;
    let f = FisherSnedecor::new(df.0, df.1).map_err(|e| Error::InvalidRequest(e.to_string()))?;
    let p = 2.0 * f.cdf(stat).min(f.sf(stat));
    Ok(TestOutcome::new(stat, p, df, corrected_alpha))
}

/// Partial correlation of `x` and `y` given `z`, read off the inverse of
/// the covariance submatrix on `{x, y} ∪ z`.
pub fn partial_correlation(cov: &DMatrix<f64>, x: usize, y: usize, z: VarSet) -> Result<f64> {
    let mut idx = vec![x, y];
    idx.extend(z.iter());
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| cov[(idx[r], idx[c])]);
    let prec = sub
        .cholesky()
        .ok_or_else(|| Error::DegenerateModel("covariance is not positive definite".into()))?
        .inverse();
    let rho = -prec[(0, 1)] / (prec[(0, 0)] * prec[(1, 1)]).sqrt();
    Ok(rho.clamp(-1.0, 1.0))
}

/// Fisher-z test of `x ⫫ y | z`: `z = √(n - |Z| - 3) atanh(ρ̂)` against a
/// standard normal, two-sided. Rejection means dependence.
pub fn fisher_z_ci_test(
    cov: &DMatrix<f64>,
    x: usize,
    y: usize,
    z: VarSet,
    n_eff: usize,
    alpha: f64,
) -> Result<TestOutcome> {
    let dof = n_eff as f64 - z.len() as f64 - 3.0;
    if dof <= 0.0 {
        return Err(Error::InsufficientSamples(format!(
            "conditioning on {} variables with {n_eff} samples",
            z.len()
        )));
    }
    let rho = partial_correlation(cov, x, y, z)?;
    // atanh(±1) is infinite; keep the statistic finite.
    let r = rho.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    let stat = dof.sqrt() * r.atanh();
    let normal = Normal::standard();
    let p = 2.0 * normal.sf(stat.abs());
    Ok(TestOutcome::new(stat, p, (dof, f64::INFINITY), alpha))
}
