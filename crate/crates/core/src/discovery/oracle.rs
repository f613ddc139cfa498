//! Sources of "is `β_S(Y)` the same in both environments?" answers.

use crate::error::Result;
use crate::graph::Dag;
use crate::sem::{generic_sem, EnvironmentData, InvarianceCheck, LinearSem};
use crate::stats::{coeff_equality_test, Moments};
use crate::varset::VarSet;

pub trait InvarianceOracle {
    fn p(&self) -> usize;

    /// Whether regressing `y` on `s` gives the same coefficients in both
    /// environments. The empty regressor set is always invariant.
    fn is_invariant(&self, y: usize, s: VarSet) -> Result<bool>;
}

/// Finite-sample answers from the coefficient-equality F-test.
#[derive(Clone, Debug)]
pub struct SampleOracle {
    pub moments_i: Moments,
    pub moments_j: Moments,
    pub corrected_alpha: f64,
}

impl SampleOracle {
    pub fn new(env_i: &EnvironmentData, env_j: &EnvironmentData, corrected_alpha: f64) -> Self {
        SampleOracle::from_moments(Moments::from_data(env_i), Moments::from_data(env_j), corrected_alpha)
    }

    pub fn from_moments(moments_i: Moments, moments_j: Moments, corrected_alpha: f64) -> Self {
        SampleOracle {
            moments_i,
            moments_j,
            corrected_alpha,
        }
    }
}

impl InvarianceOracle for SampleOracle {
    fn p(&self) -> usize {
        self.moments_i.p()
    }

    fn is_invariant(&self, y: usize, s: VarSet) -> Result<bool> {
        if s.is_empty() {
            return Ok(true);
        }
        let fi = self.moments_i.ols(s, y)?;
        let fj = self.moments_j.ols(s, y)?;
        Ok(!coeff_equality_test(&fi, &fj, self.corrected_alpha)?.reject)
    }
}

/// Exact answers from a model.
#[derive(Clone, Debug)]
pub struct PopulationOracle {
    sem: LinearSem,
    changed: VarSet,
    check: InvarianceCheck,
}

impl PopulationOracle {
    /// Structural answers for `dag` when the noises in `changed` move,
    /// evaluated at generic parameters.
    pub fn for_dag(dag: &Dag, changed: VarSet) -> Self {
        PopulationOracle {
            sem: generic_sem(dag, 0x000a_11ce),
            changed,
            check: InvarianceCheck::default(),
        }
    }

    /// Answers for environment 0 of `sem` when the noises in `changed` move.
    pub fn for_sem(sem: LinearSem, changed: VarSet) -> Self {
        PopulationOracle {
            sem,
            changed,
            check: InvarianceCheck::default(),
        }
    }

    pub fn changed(&self) -> VarSet {
        self.changed
    }
}

impl InvarianceOracle for PopulationOracle {
    fn p(&self) -> usize {
        self.sem.p()
    }

    fn is_invariant(&self, y: usize, s: VarSet) -> Result<bool> {
        if s.is_empty() || self.changed.is_empty() {
            return Ok(true);
        }
        self.sem.is_invariant_under(0, self.changed, s, y, &self.check)
    }
}
