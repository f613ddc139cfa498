use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LinearSem;
use crate::error::{Error, Result};
use crate::varset::VarSet;

/// Parameters for drawing random linear SEMs. The defaults are p = 10,
/// edge probability 0.25, coefficients in [0.1, 2] and noise variances in
/// [0.1, 4].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSemConfig {
    pub p: usize,
    pub edge_prob: f64,
    pub coeff_range: (f64, f64),
    pub var_range: (f64, f64),
    /// Give each coefficient a random sign.
    pub signed: bool,
}

impl Default for RandomSemConfig {
    fn default() -> Self {
        RandomSemConfig {
            p: 10,
            edge_prob: 0.25,
            coeff_range: (0.1, 2.0),
            var_range: (0.1, 4.0),
            signed: false,
        }
    }
}

impl RandomSemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidRequest(m.to_string()));
        if self.p == 0 {
            return bad("p must be positive");
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("edge probability must lie in [0, 1]");
        }
        let (c0, c1) = self.coeff_range;
        if !(c0 > 0.0 && c1 >= c0) {
            return bad("coefficient range must be positive and ordered");
        }
        let (v0, v1) = self.var_range;
        if !(v0 > 0.0 && v1 >= v0) {
            return bad("variance range must be positive and ordered");
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Draws a random causal order, keeps each forward pair with probability
/// `edge_prob`, then draws weights and a single environment's variances.
pub fn random_sem(config: &RandomSemConfig, seed: u64) -> Result<LinearSem> {
    config.validate()?;
    let p = config.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut rng);
    let mut b = DMatrix::zeros(p, p);
    for a in 0..p {
        for c in (a + 1)..p {
            if rng.random_bool(config.edge_prob) {
                let mut w = uniform(&mut rng, config.coeff_range);
                if config.signed && rng.random_bool(0.5) {
                    w = -w;
                }
                b[(order[c], order[a])] = w;
            }
        }
    }
    let vars: Vec<f64> = (0..p).map(|_| uniform(&mut rng, config.var_range)).collect();
    LinearSem::new(b, vec![vars])
}

/// Appends an environment equal to the last one except that the noise
/// variances of `changed` are redrawn from `var_range`, each at least
/// `min_change` away from its previous value.
pub fn perturb_environment(
    sem: &LinearSem,
    changed: VarSet,
    var_range: (f64, f64),
    min_change: f64,
    seed: u64,
) -> Result<LinearSem> {
    let p = sem.p();
    if changed.iter().any(|v| v >= p) {
        return Err(Error::InvalidRequest(format!("change set {changed:?} exceeds p = {p}")));
    }
    let (lo, hi) = var_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidRequest(
            "variance range must be positive and ordered".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vars = sem.noise_vars(sem.n_envs() - 1).to_vec();
    for k in changed.iter() {
        let old = vars[k];
        // Feasible set is [lo, old - δ] ∪ [old + δ, hi]; sample it directly.
        let left = ((old - min_change).min(hi) - lo).max(0.0);
        let right = (hi - (old + min_change).max(lo)).max(0.0);
        let total = left + right;
        if total <= 0.0 {
            return Err(Error::InvalidRequest(format!(
                "cannot move variance {old} by {min_change} within [{lo}, {hi}]"
            )));
        }
        let u = rng.random_range(0.0..total);
        vars[k] = if u < left {
            lo + u
        } else {
            (old + min_change).max(lo) + (u - left)
        };
    }
    sem.with_environment(vars)
}
