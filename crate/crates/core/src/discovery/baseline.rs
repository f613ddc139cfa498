//! Exhaustive search over the DAGs that agree with the observed invariances.

use log::warn;
use serde::Serialize;

use super::{check_environments, env_pairs, skeleton::pc_from_moments, SkeletonOptions};
use crate::error::Result;
use crate::graph::{consistent_dag_extensions, graph_union, meek_closure, Dag, ExtensionOptions, MixedGraph};
use crate::invariance::{neighbor_corrected_alpha, ChangeSet, RegressionInvarianceSet, Scope};
use crate::par::try_par_map;
use crate::sem::{population_invariance_set_on, EnvironmentData};
use crate::stats::{coeff_equality_test, residual_variance_test, Moments};
use crate::varset::VarSet;

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOptions {
    pub alpha: f64,
    pub skeleton: SkeletonOptions,
    /// Largest `p` that uses the full regressor family; above it the
    /// family is restricted to neighbor subsets.
    pub full_scope_max_p: usize,
    /// Size cap on neighbor subsets.
    pub max_set_size: Option<usize>,
    pub extensions: ExtensionOptions,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            alpha: 0.01,
            skeleton: SkeletonOptions::default(),
            full_scope_max_p: 10,
            max_set_size: None,
            extensions: ExtensionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSummary {
    pub change_set: ChangeSet,
    /// Number of DAG extensions matching the observed invariances.
    pub n_consistent: usize,
    /// No extension matched and the essential graph was used instead.
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct BaselineOutput {
    pub graph: MixedGraph,
    pub essential: MixedGraph,
    pub pairs: Vec<PairSummary>,
}

/// Finite-sample regression invariance set: `(Y, S)` is included iff the
/// coefficient-equality test does not reject at the scope's corrected level.
/// Pairs without enough degrees of freedom are left out of the universe.
pub fn regression_invariance_set(
    env_i: &EnvironmentData,
    env_j: &EnvironmentData,
    alpha: f64,
    scope: &Scope,
) -> Result<RegressionInvarianceSet> {
    regression_invariance_set_from_moments(&Moments::from_data(env_i), &Moments::from_data(env_j), alpha, scope)
}

pub fn regression_invariance_set_from_moments(
    mi: &Moments,
    mj: &Moments,
    alpha: f64,
    scope: &Scope,
) -> Result<RegressionInvarianceSet> {
    let p = mi.p();
    let level = scope.corrected_alpha(alpha, p);
    let mut r = RegressionInvarianceSet::new(p);
    for (y, s) in scope.pairs(p) {
        if mi.n + mj.n <= 2 * s.len() || mi.n <= s.len() || mj.n <= s.len() {
            continue;
        }
        let t = coeff_equality_test(&mi.ols(s, y)?, &mj.ols(s, y)?, level)?;
        r.record(y, s, !t.reject);
    }
    Ok(r)
}

/// Variables whose noise variance changed: `Y` is reported iff the
/// residual-variance test rejects for every `S ⊆ N(Y)` (including `∅`)
/// with `(Y, S) ∈ r_ij`. Tests run at `α / (p (2^Δ - 1))`.
pub fn change_finder(
    env_i: &EnvironmentData,
    env_j: &EnvironmentData,
    r_ij: &RegressionInvarianceSet,
    neighbors: &[VarSet],
    alpha: f64,
    max_size: Option<usize>,
) -> Result<VarSet> {
    change_finder_from_moments(
        &Moments::from_data(env_i),
        &Moments::from_data(env_j),
        r_ij,
        neighbors,
        alpha,
        max_size,
    )
}

pub fn change_finder_from_moments(
    mi: &Moments,
    mj: &Moments,
    r_ij: &RegressionInvarianceSet,
    neighbors: &[VarSet],
    alpha: f64,
    max_size: Option<usize>,
) -> Result<VarSet> {
    let p = mi.p();
    let delta = neighbors.iter().map(|s| s.len()).max().unwrap_or(0);
    let level = neighbor_corrected_alpha(alpha, p, delta);
    let cap = max_size.unwrap_or(usize::MAX);
    let mut changed = VarSet::EMPTY;
    'targets: for y in 0..p {
        for s in neighbors[y].without(y).subsets_by_size(cap) {
            if !r_ij.contains(y, s) {
                continue;
            }
            if !residual_variance_test(&mi.ols(s, y)?, &mj.ols(s, y)?, level)?.reject {
                continue 'targets;
            }
        }
        changed.insert(y);
    }
    Ok(changed)
}

/// Change set of every environment pair, using neighbor-scope invariance
/// sets on `ess`.
pub fn estimate_change_sets(
    envs: &[EnvironmentData],
    ess: &MixedGraph,
    alpha: f64,
    max_size: Option<usize>,
) -> Result<Vec<ChangeSet>> {
    check_environments(envs)?;
    let moments: Vec<Moments> = envs.iter().map(Moments::from_data).collect();
    let scope = Scope::neighbors_of(ess, max_size);
    let neighbors: Vec<VarSet> = (0..ess.p()).map(|y| ess.neighbors(y)).collect();
    try_par_map(&env_pairs(envs.len()), |&(i, j)| {
        let r = regression_invariance_set_from_moments(&moments[i], &moments[j], alpha, &scope)?;
        let vars = change_finder_from_moments(&moments[i], &moments[j], &r, &neighbors, alpha, max_size)?;
        Ok(ChangeSet::new(vars, (i, j)))
    })
}

/// Every DAG extension of `ess` whose population invariance set under
/// `i_ij`, evaluated on the pairs examined in `r_ij`, equals `r_ij`.
pub fn consistent_finder(
    ess: &MixedGraph,
    r_ij: &RegressionInvarianceSet,
    i_ij: &ChangeSet,
    opts: &ExtensionOptions,
) -> Result<Vec<Dag>> {
    let universe = r_ij.universe();
    let mut out = Vec::new();
    for dag in consistent_dag_extensions(ess, opts)? {
        let r_g = population_invariance_set_on(&dag, i_ij.vars, &universe);
        if r_g.matches(r_ij) {
            out.push(dag);
        }
    }
    Ok(out)
}

/// Baseline on data: essential graph, then per environment pair the
/// invariance set, change set and consistent DAGs, then the union over all
/// pairs and a final Meek closure. One environment yields the essential
/// graph.
pub fn baseline(envs: &[EnvironmentData], opts: &BaselineOptions) -> Result<BaselineOutput> {
    check_environments(envs)?;
    let moments: Vec<Moments> = envs.iter().map(Moments::from_data).collect();
    let names = envs[0].names().to_vec();
    let ess = pc_from_moments(&moments, &opts.skeleton)?
        .graph
        .with_names(Some(names.clone()));
    let p = ess.p();
    let scope = if p <= opts.full_scope_max_p {
        Scope::Full
    } else {
        Scope::neighbors_of(&ess, opts.max_set_size)
    };
    let neighbors: Vec<VarSet> = (0..p).map(|y| ess.neighbors(y)).collect();
    let inputs = try_par_map(&env_pairs(envs.len()), |&(i, j)| {
        let r = regression_invariance_set_from_moments(&moments[i], &moments[j], opts.alpha, &scope)?;
        let vars = change_finder_from_moments(&moments[i], &moments[j], &r, &neighbors, opts.alpha, opts.max_set_size)?;
        Ok((r, ChangeSet::new(vars, (i, j))))
    })?;
    let mut out = baseline_from_invariance(&ess, &inputs, &opts.extensions)?;
    out.graph = out.graph.with_names(Some(names));
    Ok(out)
}

/// Baseline from a given essential graph and per-pair invariance and change
/// sets. With exact population inputs the result is the most informative
/// graph the invariances allow.
pub fn baseline_from_invariance(
    ess: &MixedGraph,
    inputs: &[(RegressionInvarianceSet, ChangeSet)],
    opts: &ExtensionOptions,
) -> Result<BaselineOutput> {
    let per_pair = try_par_map(inputs, |(r, c)| {
        let dags = consistent_finder(ess, r, c, opts)?;
        let n = dags.len();
        let m = if dags.is_empty() {
            warn!(
                "no DAG matches the invariances of environments {:?}; keeping the essential graph",
                c.env_pair
            );
            ess.clone()
        } else {
            graph_union(dags.iter().map(Dag::as_mixed))?
        };
        Ok((m, n))
    })?;
    let mut merged = ess.clone();
    let mut pairs = Vec::with_capacity(inputs.len());
    if !per_pair.is_empty() {
        merged = graph_union(per_pair.iter().map(|(m, _)| m))?;
    }
    for ((_, c), (_, n)) in inputs.iter().zip(&per_pair) {
        pairs.push(PairSummary {
            change_set: *c,
            n_consistent: *n,
            fallback: *n == 0,
        });
    }
    Ok(BaselineOutput {
        graph: meek_closure(&merged).with_names(ess.names().map(|n| n.to_vec())),
        essential: ess.clone(),
        pairs,
    })
}
