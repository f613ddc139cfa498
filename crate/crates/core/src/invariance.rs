//! Regression invariance sets, change sets and the regressor-set families
//! they range over.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::MixedGraph;
use crate::varset::VarSet;

/// Which `(target, regressors)` pairs an invariance set talks about.
/// The empty regressor set is never part of a scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Every nonempty `S ⊆ V \ {Y}`.
    Full,
    /// Nonempty `S ⊆ N(Y)` with at most `max_size` members.
    Neighbors { neighbors: Vec<VarSet>, max_size: usize },
}

impl Scope {
    /// Neighbor scope taken from a graph's skeleton.
    pub fn neighbors_of(g: &MixedGraph, max_size: Option<usize>) -> Scope {
        let neighbors: Vec<VarSet> = (0..g.p()).map(|y| g.neighbors(y)).collect();
        let max_size = max_size.unwrap_or(usize::MAX);
        Scope::Neighbors { neighbors, max_size }
    }

    /// Candidate regressor sets for `y`, by size then lexicographically.
    pub fn regressor_sets(&self, p: usize, y: usize) -> Vec<VarSet> {
        let (pool, cap) = match self {
            Scope::Full => (VarSet::full(p).without(y), p),
            Scope::Neighbors { neighbors, max_size } => (neighbors[y].without(y), *max_size),
        };
        pool.subsets_by_size(cap)
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn pairs(&self, p: usize) -> Vec<(usize, VarSet)> {
        (0..p)
            .flat_map(|y| self.regressor_sets(p, y).into_iter().map(move |s| (y, s)))
            .collect()
    }

    /// Per-test level after a Bonferroni correction:
    /// `α / (p (2^(p-1) - 1))` for the full family and `α / (p (2^Δ - 1))`
    /// with `Δ` the maximum degree for the neighbor family.
    pub fn corrected_alpha(&self, alpha: f64, p: usize) -> f64 {
        let per_target = match self {
            Scope::Full => 2f64.powi(p as i32 - 1) - 1.0,
            Scope::Neighbors { neighbors, .. } => {
                let delta = neighbors.iter().map(|s| s.len()).max().unwrap_or(0);
                2f64.powi(delta as i32) - 1.0
            }
        };
        alpha / (p as f64 * per_target).max(1.0)
    }
}

/// Level used for neighbor-restricted tests on a graph with maximum degree
/// `max_degree`.
pub fn neighbor_corrected_alpha(alpha: f64, p: usize, max_degree: usize) -> f64 {
    alpha / (p as f64 * (2f64.powi(max_degree as i32) - 1.0)).max(1.0)
}

/// The pairs `(Y, S)` whose regression coefficients are invariant between
/// two environments, together with the universe of pairs that were examined.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RegressionInvarianceSet {
    p: usize,
    tested: HashMap<(usize, VarSet), bool>,
}

impl RegressionInvarianceSet {
    pub fn new(p: usize) -> Self {
        RegressionInvarianceSet {
            p,
            tested: HashMap::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn record(&mut self, y: usize, s: VarSet, invariant: bool) {
        debug_assert!(!s.contains(y));
        self.tested.insert((y, s), invariant);
    }

    /// Membership. The empty regressor set is always invariant.
    pub fn contains(&self, y: usize, s: VarSet) -> bool {
        s.is_empty() || self.tested.get(&(y, s)).copied().unwrap_or(false)
    }

    pub fn was_tested(&self, y: usize, s: VarSet) -> bool {
        self.tested.contains_key(&(y, s))
    }

    pub fn n_tested(&self) -> usize {
        self.tested.len()
    }

    pub fn len(&self) -> usize {
        self.tested.values().filter(|v| **v).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Examined pairs, sorted.
    pub fn universe(&self) -> Vec<(usize, VarSet)> {
        let mut v: Vec<_> = self.tested.keys().copied().collect();
        v.sort();
        v
    }

    /// Invariant pairs, sorted.
    pub fn pairs(&self) -> Vec<(usize, VarSet)> {
        let mut v: Vec<_> = self.tested.iter().filter(|(_, inv)| **inv).map(|(k, _)| *k).collect();
        v.sort();
        v
    }

    pub fn same_universe(&self, other: &Self) -> bool {
        self.p == other.p
            && self.tested.len() == other.tested.len()
            && self.tested.keys().all(|k| other.tested.contains_key(k))
    }

    /// Pairs where the two sets disagree. Panics if the universes differ,
    /// since comparing sets over different pair families is meaningless.
    pub fn disagreements(&self, other: &Self) -> Vec<(usize, VarSet)> {
        assert!(self.same_universe(other), "invariance sets over different universes");
        let mut v: Vec<_> = self
            .tested
            .iter()
            .filter(|(k, inv)| other.tested[*k] != **inv)
            .map(|(k, _)| *k)
            .collect();
        v.sort();
        v
    }

    pub fn matches(&self, other: &Self) -> bool {
        assert!(self.same_universe(other), "invariance sets over different universes");
        self.tested.iter().all(|(k, inv)| other.tested[k] == *inv)
    }
}

/// Variables whose exogenous noise variance differs between two environments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChangeSet {
    pub vars: VarSet,
    pub env_pair: (usize, usize),
}

impl ChangeSet {
    pub fn new(vars: VarSet, env_pair: (usize, usize)) -> Self {
        ChangeSet { vars, env_pair }
    }
}
