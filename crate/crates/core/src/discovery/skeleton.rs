//! PC-style essential-graph estimation on pooled environments.
//!
//! Every environment shares `A`, so the pooled second-moment matrix is
//! `A Λ̄ Aᵀ` with `Λ̄` the sample-weighted average of the noise variances.
//! That is the covariance of the same SEM with averaged noise, hence its
//! conditional independences are exactly the d-separations of the shared
//! DAG, and PC on the pooled moments is consistent for the shared skeleton.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{meek_closure, MixedGraph};
use crate::sem::EnvironmentData;
use crate::stats::{fisher_z_ci_test, Moments};
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkeletonOptions {
    /// Level of each Fisher-z test.
    pub alpha: f64,
    /// Largest conditioning set; unbounded when `None`.
    pub max_cond: Option<usize>,
}

impl Default for SkeletonOptions {
    fn default() -> Self {
        SkeletonOptions {
            alpha: 0.01,
            max_cond: None,
        }
    }
}

/// Output of the PC search.
#[derive(Clone, Debug)]
pub struct PcResult {
    pub graph: MixedGraph,
    /// Separating set for each removed pair `(i, j)`, `i < j`.
    pub sepsets: HashMap<(usize, usize), VarSet>,
}

/// Essential graph estimated from the pooled environments.
pub fn estimate_skeleton(envs: &[EnvironmentData], opts: &SkeletonOptions) -> Result<MixedGraph> {
    let moments: Vec<Moments> = envs.iter().map(Moments::from_data).collect();
    Ok(pc_from_moments(&moments, opts)?
        .graph
        .with_names(envs.first().map(|e| e.names().to_vec())))
}

pub fn pc_from_moments(moments: &[Moments], opts: &SkeletonOptions) -> Result<PcResult> {
    let pooled = Moments::pooled(moments).ok_or_else(|| Error::InvalidRequest("no environments".into()))?;
    let cov = &pooled.xtx / pooled.n as f64;
    pc(&cov, pooled.n, opts)
}

/// PC-stable on a covariance matrix: adjacency sets are frozen at the start
/// of each conditioning-set size, so the skeleton does not depend on the
/// variable order.
pub fn pc(cov: &DMatrix<f64>, n_eff: usize, opts: &SkeletonOptions) -> Result<PcResult> {
    let p = cov.nrows();
    let mut g = MixedGraph::complete(p);
    let mut sepsets = HashMap::new();
    let mut level = 0usize;
    loop {
        if opts.max_cond.is_some_and(|m| level > m) {
            break;
        }
        let frozen: Vec<VarSet> = (0..p).map(|x| g.neighbors(x)).collect();
        if (0..p).all(|x| frozen[x].len() < level + 1) {
            break;
        }
        for x in 0..p {
            for y in frozen[x].iter() {
                if !g.is_adjacent(x, y) {
                    continue;
                }
                let pool = frozen[x].without(y);
                if pool.len() < level {
                    continue;
                }
                for s in pool.subsets_by_size(level).into_iter().filter(|s| s.len() == level) {
                    let t = fisher_z_ci_test(cov, x, y, s, n_eff, opts.alpha)?;
                    if !t.reject {
                        g.remove_edge(x, y);
                        sepsets.insert((x.min(y), x.max(y)), s);
                        break;
                    }
                }
            }
        }
        level += 1;
    }
    orient_colliders(&mut g, &sepsets);
    Ok(PcResult {
        graph: meek_closure(&g),
        sepsets,
    })
}

fn orient_colliders(g: &mut MixedGraph, sepsets: &HashMap<(usize, usize), VarSet>) {
    let p = g.p();
    for z in 0..p {
        let nb = g.neighbors(z).to_vec();
        for (k, &x) in nb.iter().enumerate() {
            for &y in &nb[k + 1..] {
                if g.is_adjacent(x, y) {
                    continue;
                }
                let sep = sepsets.get(&(x.min(y), x.max(y))).copied().unwrap_or_default();
                if sep.contains(z) {
                    continue;
                }
                // Conflicting collider evidence: keep the first arrowhead,
                // and never close a directed cycle.
                for w in [x, y] {
                    if g.has_undirected(w, z) {
                        let mut trial = g.clone();
                        trial.orient(w, z);
                        if !trial.has_directed_cycle() {
                            *g = trial;
                        }
                    }
                }
            }
        }
    }
}
