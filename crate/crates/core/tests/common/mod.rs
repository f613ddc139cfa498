//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's graph or regression routines.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lre_core::graph::Mark;
use lre_core::{Dag, LinearSem, MixedGraph, VarSet};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Edges = Vec<(usize, usize)>;
pub type EdgeSet = BTreeSet<(usize, usize)>;

pub fn is_acyclic(p: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0usize; p];
    for &(_, j) in edges {
        indeg[j] += 1;
    }
    let mut stack: Vec<usize> = (0..p).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &(i, j) in edges {
            if i == v {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
    }
    seen == p
}

/// Every labelled DAG on `p` nodes: each unordered pair is absent, `i -> j`
/// or `j -> i`.
pub fn all_dags(p: usize) -> Vec<Edges> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            code /= 3;
        }
        if is_acyclic(p, &edges) {
            out.push(edges);
        }
    }
    out
}

pub fn dag(p: usize, edges: &[(usize, usize)]) -> Dag {
    Dag::new(p, edges).unwrap()
}

fn skeleton_of(edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect()
}

/// Unshielded colliders `a -> c <- b` with `a < b`.
pub fn v_structures(edges: &[(usize, usize)]) -> BTreeSet<(usize, usize, usize)> {
    let sk = skeleton_of(edges);
    let mut out = BTreeSet::new();
    for &(a, c) in edges {
        for &(b, c2) in edges {
            if c == c2 && a < b && !sk.contains(&(a, b)) {
                out.insert((a, c, b));
            }
        }
    }
    out
}

/// All acyclic orientations of the skeleton of `edges`.
pub fn same_skeleton(p: usize, edges: &[(usize, usize)]) -> Vec<Edges> {
    let sk: Vec<(usize, usize)> = skeleton_of(edges).into_iter().collect();
    (0..1u64 << sk.len())
        .map(|mask| {
            sk.iter()
                .enumerate()
                .map(|(k, &(i, j))| if mask >> k & 1 == 1 { (j, i) } else { (i, j) })
                .collect::<Edges>()
        })
        .filter(|e| is_acyclic(p, e))
        .collect()
}

pub fn markov_class(p: usize, edges: &[(usize, usize)]) -> Vec<Edges> {
    let v = v_structures(edges);
    same_skeleton(p, edges)
        .into_iter()
        .filter(|e| v_structures(e) == v)
        .collect()
}

/// Graph union: an edge is directed when every member orients it the same
/// way and undirected otherwise. Members must share a skeleton.
pub fn union(p: usize, members: &[Edges]) -> MixedGraph {
    let mut seen: BTreeMap<(usize, usize), (bool, bool)> = BTreeMap::new();
    for e in members {
        for &(i, j) in e {
            let slot = seen.entry((i.min(j), i.max(j))).or_default();
            if i < j {
                slot.0 = true;
            } else {
                slot.1 = true;
            }
        }
    }
    let mut directed = Vec::new();
    let mut undirected = Vec::new();
    for (&(i, j), &(fwd, back)) in &seen {
        match (fwd, back) {
            (true, false) => directed.push((i, j)),
            (false, true) => directed.push((j, i)),
            _ => undirected.push((i, j)),
        }
    }
    MixedGraph::from_edges(p, &directed, &undirected).unwrap()
}

/// Directed and undirected edge sets of a mixed graph as plain sets.
pub fn edge_sets(g: &MixedGraph) -> (EdgeSet, EdgeSet) {
    let p = g.p();
    let mut d = BTreeSet::new();
    let mut u = BTreeSet::new();
    for i in 0..p {
        for j in 0..p {
            match g.mark(i, j) {
                Mark::Out => {
                    d.insert((i, j));
                }
                Mark::Undirected if i < j => {
                    u.insert((i, j));
                }
                _ => {}
            }
        }
    }
    (d, u)
}

pub fn same_graph(a: &MixedGraph, b: &MixedGraph) -> bool {
    edge_sets(a) == edge_sets(b)
}

/// Meek's four rules, applied by exhaustive search over quadruples until a
/// fixpoint.
pub fn meek(g: &MixedGraph) -> MixedGraph {
    let p = g.p();
    let (mut d, mut u) = edge_sets(g);
    let adj = |d: &BTreeSet<(usize, usize)>, u: &BTreeSet<(usize, usize)>, a: usize, b: usize| {
        d.contains(&(a, b)) || d.contains(&(b, a)) || u.contains(&(a.min(b), a.max(b)))
    };
    let und = |u: &BTreeSet<(usize, usize)>, a: usize, b: usize| u.contains(&(a.min(b), a.max(b)));
    loop {
        let mut hit = None;
        'scan: for &(x, y) in &u {
            for (a, b) in [(x, y), (y, x)] {
                for c in 0..p {
                    if c == a || c == b {
                        continue;
                    }
                    // R1
                    if d.contains(&(c, a)) && !adj(&d, &u, c, b) {
                        hit = Some((a, b));
                        break 'scan;
                    }
                    // R2
                    if d.contains(&(a, c)) && d.contains(&(c, b)) {
                        hit = Some((a, b));
                        break 'scan;
                    }
                    for e in 0..p {
                        if e == a || e == b || e == c {
                            continue;
                        }
                        // R3
                        if und(&u, a, c)
                            && und(&u, a, e)
                            && d.contains(&(c, b))
                            && d.contains(&(e, b))
                            && !adj(&d, &u, c, e)
                        {
                            hit = Some((a, b));
                            break 'scan;
                        }
                        // R4
                        if und(&u, a, c)
                            && d.contains(&(c, e))
                            && d.contains(&(e, b))
                            && adj(&d, &u, a, e)
                            && !adj(&d, &u, c, b)
                        {
                            hit = Some((a, b));
                            break 'scan;
                        }
                    }
                }
            }
        }
        match hit {
            Some((a, b)) => {
                u.remove(&(a.min(b), a.max(b)));
                d.insert((a, b));
            }
            None => break,
        }
    }
    let d: Vec<_> = d.into_iter().collect();
    let u: Vec<_> = u.into_iter().collect();
    MixedGraph::from_edges(p, &d, &u).unwrap()
}

/// `Cov(X) = (I - B)^{-1} diag(vars) (I - B)^{-T}` with `b[(j, i)]` the
/// weight of `i -> j`.
pub fn covariance(b: &DMatrix<f64>, vars: &[f64]) -> DMatrix<f64> {
    let p = b.nrows();
    let a = (DMatrix::identity(p, p) - b).lu().try_inverse().unwrap();
    &a * DMatrix::from_diagonal(&DVector::from_column_slice(vars)) * a.transpose()
}

/// `Cov(X_S)^{-1} Cov(X_S, Y)` read off the full covariance.
pub fn cov_regression(cov: &DMatrix<f64>, s: &[usize], y: usize) -> DVector<f64> {
    let css = DMatrix::from_fn(s.len(), s.len(), |r, c| cov[(s[r], s[c])]);
    let csy = DVector::from_fn(s.len(), |r, _| cov[(s[r], y)]);
    css.lu().solve(&csy).unwrap()
}

/// Residual variance of `y` on `s` from the full covariance.
pub fn cov_residual_variance(cov: &DMatrix<f64>, s: &[usize], y: usize) -> f64 {
    let beta = cov_regression(cov, s, y);
    let csy = DVector::from_fn(s.len(), |r, _| cov[(s[r], y)]);
    cov[(y, y)] - beta.dot(&csy)
}

pub fn weights(p: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(p, p);
    for &(i, j) in edges {
        b[(j, i)] = rng.random_range(0.5..1.5);
    }
    b
}

/// Every nonempty proper regressor set for each target.
pub fn full_pairs(p: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for y in 0..p {
        let others: Vec<usize> = (0..p).filter(|&v| v != y).collect();
        for mask in 1u32..1 << others.len() {
            let s = others
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &v)| v)
                .collect();
            out.push((y, s));
        }
    }
    out
}

fn close(a: &DVector<f64>, b: &DVector<f64>, rel: f64) -> bool {
    let scale = a.amax().max(b.amax()).max(1.0);
    (a - b).amax() <= rel * scale
}

/// `R(G, I)` by the covariance route: the pairs whose coefficients agree at
/// the base point and at four random rescalings of the changed variances.
pub fn invariance_oracle(
    p: usize,
    edges: &[(usize, usize)],
    changed: &[usize],
    seed: u64,
) -> BTreeSet<(usize, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = weights(p, edges, &mut rng);
    let base: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
    let moved: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let mut v = base.clone();
            for &c in changed {
                v[c] *= rng.random_range(1.5..4.0);
            }
            v
        })
        .collect();
    let cov0 = covariance(&b, &base);
    let covs: Vec<DMatrix<f64>> = moved.iter().map(|v| covariance(&b, v)).collect();
    full_pairs(p)
        .into_iter()
        .filter(|(y, s)| {
            let b0 = cov_regression(&cov0, s, *y);
            covs.iter().all(|c| close(&b0, &cov_regression(c, s, *y), 1e-7))
        })
        .collect()
}

/// `M_I`: Meek closure of the union of Markov-equivalent DAGs whose
/// invariance sets equal the truth's.
pub fn m_i(p: usize, truth: &[(usize, usize)], changed: &[usize]) -> MixedGraph {
    let target = invariance_oracle(p, truth, changed, 7);
    let class: Vec<Edges> = markov_class(p, truth)
        .into_iter()
        .filter(|e| invariance_oracle(p, e, changed, 7) == target)
        .collect();
    meek(&union(p, &class))
}

pub fn varset(vs: &[usize]) -> VarSet {
    vs.iter().copied().collect()
}

pub fn subsets(p: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << p).map(move |m| (0..p).filter(|&v| m >> v & 1 == 1).collect())
}

/// Random DAG over a shuffled order, edges with probability `prob`.
pub fn random_dag(p: usize, prob: f64, rng: &mut ChaCha8Rng) -> Edges {
    let mut order: Vec<usize> = (0..p).collect();
    for k in (1..p).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    let mut edges = Vec::new();
    for a in 0..p {
        for b in a + 1..p {
            if rng.random_bool(prob) {
                edges.push((order[a], order[b]));
            }
        }
    }
    edges
}

pub fn random_model(p: usize, prob: f64, rng: &mut ChaCha8Rng) -> (LinearSem, Edges) {
    let edges = random_dag(p, prob, rng);
    let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(i, j)| (i, j, rng.random_range(0.5..1.5))).collect();
    let vars: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
    (LinearSem::from_edges(p, &weighted, vec![vars]).unwrap(), edges)
}
