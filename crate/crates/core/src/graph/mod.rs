//! DAGs and mixed graphs over indexed variables.
//!
//! Edge identity is by variable index. Names are carried along for display
//! and serialization only.

mod dag;
mod enumerate;
mod io;
mod meek;

pub use dag::{essential_graph, Dag};
pub use enumerate::{consistent_dag_extensions, ExtensionOptions, Extensions, DEFAULT_EXTENSION_CAP};
pub use io::GraphJson;
pub use meek::{meek_closure, meek_closure_in_order};

use crate::error::{Error, Result};
use crate::varset::{VarSet, MAX_VARS};

/// Mark on the ordered pair `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mark {
    #[default]
    None,
    /// `i -> j`
    Out,
    /// `j -> i`
    In,
    /// `i - j`
    Undirected,
}

impl Mark {
    fn flipped(self) -> Mark {
        match self {
            Mark::Out => Mark::In,
            Mark::In => Mark::Out,
            m => m,
        }
    }
}

/// A graph with directed and undirected edges. Each unordered pair is
/// directed one way, undirected, or absent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedGraph {
    p: usize,
    names: Option<Vec<String>>,
    marks: Vec<Mark>,
}

impl MixedGraph {
    pub fn new(p: usize) -> Self {
        assert!(p <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        MixedGraph {
            p,
            names: None,
            marks: vec![Mark::None; p * p],
        }
    }

    pub fn from_edges(p: usize, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Result<Self> {
        let mut g = MixedGraph::new(p);
        for &(i, j) in directed {
            g.add_directed(i, j)?;
        }
        for &(i, j) in undirected {
            g.add_undirected(i, j)?;
        }
        Ok(g)
    }

    /// Complete undirected graph on `p` variables.
    pub fn complete(p: usize) -> Self {
        let mut g = MixedGraph::new(p);
        for i in 0..p {
            for j in (i + 1)..p {
                g.set(i, j, Mark::Undirected);
            }
        }
        g
    }

    pub fn with_names(mut self, names: Option<Vec<String>>) -> Self {
        if let Some(n) = &names {
            assert_eq!(n.len(), self.p, "one name per variable");
        }
        self.names = names;
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn name(&self, i: usize) -> String {
        match &self.names {
            Some(n) => n[i].clone(),
            None => format!("x{}", i + 1),
        }
    }

    pub fn mark(&self, i: usize, j: usize) -> Mark {
        self.marks[i * self.p + j]
    }

    fn set(&mut self, i: usize, j: usize, m: Mark) {
        self.marks[i * self.p + j] = m;
        self.marks[j * self.p + i] = m.flipped();
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.p || j >= self.p || i == j {
            return Err(Error::InvalidEdge(i, j, self.p));
        }
        Ok(())
    }

    /// Adds `i -> j`. The pair must be currently unconnected.
    pub fn add_directed(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_pair(i, j)?;
        if self.mark(i, j) != Mark::None {
            return Err(Error::InvalidEdge(i, j, self.p));
        }
        self.set(i, j, Mark::Out);
        Ok(())
    }

    /// Adds `i - j`. The pair must be currently unconnected.
    pub fn add_undirected(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_pair(i, j)?;
        if self.mark(i, j) != Mark::None {
            return Err(Error::InvalidEdge(i, j, self.p));
        }
        self.set(i, j, Mark::Undirected);
        Ok(())
    }

    /// Turns `i - j` into `i -> j`. Returns false if the pair was not undirected.
    pub fn orient(&mut self, i: usize, j: usize) -> bool {
        if self.mark(i, j) == Mark::Undirected {
            self.set(i, j, Mark::Out);
            true
        } else {
            false
        }
    }

    /// Forgets the orientation of the pair, if it is adjacent.
    pub fn unorient(&mut self, i: usize, j: usize) {
        if self.is_adjacent(i, j) {
            self.set(i, j, Mark::Undirected);
        }
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.set(i, j, Mark::None);
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.mark(i, j) != Mark::None
    }

    pub fn has_directed(&self, i: usize, j: usize) -> bool {
        self.mark(i, j) == Mark::Out
    }

    pub fn has_undirected(&self, i: usize, j: usize) -> bool {
        self.mark(i, j) == Mark::Undirected
    }

    fn collect(&self, i: usize, m: Mark) -> VarSet {
        (0..self.p).filter(|&j| self.mark(i, j) == m).collect()
    }

    pub fn parents(&self, i: usize) -> VarSet {
        self.collect(i, Mark::In)
    }

    pub fn children(&self, i: usize) -> VarSet {
        self.collect(i, Mark::Out)
    }

    pub fn undirected_neighbors(&self, i: usize) -> VarSet {
        self.collect(i, Mark::Undirected)
    }

    pub fn neighbors(&self, i: usize) -> VarSet {
        (0..self.p).filter(|&j| self.is_adjacent(i, j)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.p).map(|i| self.neighbors(i).len()).max().unwrap_or(0)
    }

    /// Directed edges `(i, j)` meaning `i -> j`, sorted.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in 0..self.p {
                if self.has_directed(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Undirected edges as `(i, j)` with `i < j`, sorted.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        self.pairs_where(|m| m == Mark::Undirected)
    }

    /// Every adjacent pair as `(i, j)` with `i < j`, sorted.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        self.pairs_where(|m| m != Mark::None)
    }

    fn pairs_where(&self, f: impl Fn(Mark) -> bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if f(self.mark(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// First pair (in index order) where adjacency differs, if any.
    pub fn skeleton_difference(&self, other: &MixedGraph) -> Option<(usize, usize)> {
        if self.p != other.p {
            return Some((self.p.min(other.p), self.p.max(other.p)));
        }
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                if self.is_adjacent(i, j) != other.is_adjacent(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// The same skeleton with every edge undirected.
    pub fn undirected_skeleton(&self) -> MixedGraph {
        let mut g = self.clone();
        for (i, j) in self.skeleton() {
            g.set(i, j, Mark::Undirected);
        }
        g
    }

    /// Topological order of the directed part, or `None` if it has a cycle.
    pub fn directed_topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.p).map(|i| self.parents(i).len()).collect();
        let mut ready: Vec<usize> = (0..self.p).rev().filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.p);
        while let Some(v) = ready.pop() {
            order.push(v);
            for c in self.children(v).iter().collect::<Vec<_>>().into_iter().rev() {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == self.p).then_some(order)
    }

    pub fn has_directed_cycle(&self) -> bool {
        self.directed_topological_order().is_none()
    }

    /// Relabels variables: variable `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MixedGraph {
        let mut g = MixedGraph::new(self.p);
        for i in 0..self.p {
            for j in 0..self.p {
                g.marks[perm[i] * self.p + perm[j]] = self.mark(i, j);
            }
        }
        if let Some(names) = &self.names {
            let mut renamed = names.clone();
            for i in 0..self.p {
                renamed[perm[i]] = names[i].clone();
            }
            g.names = Some(renamed);
        }
        g
    }
}

/// Graph union over mixed graphs sharing one skeleton.
///
/// A pair ends up `x -> y` when at least one member has `x -> y` and no
/// member has `y -> x`. Every other adjacent pair is undirected. Names are
/// taken from the first member.
pub fn graph_union<'a, I>(graphs: I) -> Result<MixedGraph>
where
    I: IntoIterator<Item = &'a MixedGraph>,
{
    let mut iter = graphs.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidRequest("graph union of an empty list".into()))?;
    let p = first.p;
    // Per ordered pair: seen forward, seen backward.
    let mut forward = vec![false; p * p];
    let mut record = |g: &MixedGraph| {
        for (i, j) in g.directed_edges() {
            forward[i * p + j] = true;
        }
    };
    record(first);
    for g in iter {
        if let Some((i, j)) = first.skeleton_difference(g) {
            return Err(Error::SkeletonMismatch(i, j));
        }
        record(g);
    }
    let mut out = first.undirected_skeleton();
    for (i, j) in first.skeleton() {
        match (forward[i * p + j], forward[j * p + i]) {
            (true, false) => out.set(i, j, Mark::Out),
            (false, true) => out.set(j, i, Mark::Out),
            _ => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: usize, d: &[(usize, usize)], u: &[(usize, usize)]) -> MixedGraph {
        MixedGraph::from_edges(p, d, u).unwrap()
    }

    #[test]
    fn union_keeps_unanimous_orientation() {
        let a = g(2, &[(0, 1)], &[]);
        assert_eq!(graph_union([&a, &a]).unwrap(), a);
    }

    #[test]
    fn union_of_opposite_orientations_is_undirected() {
        let a = g(2, &[(0, 1)], &[]);
        let b = g(2, &[(1, 0)], &[]);
        assert_eq!(graph_union([&a, &b]).unwrap(), g(2, &[], &[(0, 1)]));
    }

    #[test]
    fn undirected_member_does_not_veto() {
        let a = g(3, &[(0, 1)], &[(1, 2)]);
        let b = g(3, &[(0, 1), (1, 2)], &[]);
        assert_eq!(graph_union([&a, &b]).unwrap(), b);
    }

    #[test]
    fn union_reports_first_skeleton_difference() {
        let a = g(3, &[(0, 1)], &[(1, 2)]);
        let b = g(3, &[(0, 1)], &[(0, 2)]);
        match graph_union([&a, &b]) {
            Err(Error::SkeletonMismatch(0, 2)) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(graph_union(std::iter::empty()).is_err());
    }

    #[test]
    fn edges_reject_self_loops_and_duplicates() {
        let mut m = MixedGraph::new(3);
        assert!(m.add_directed(1, 1).is_err());
        m.add_directed(0, 1).unwrap();
        assert!(m.add_directed(1, 0).is_err());
        assert!(m.add_undirected(0, 1).is_err());
        assert!(m.add_undirected(0, 3).is_err());
    }

    #[test]
    fn neighborhoods() {
        let m = g(4, &[(0, 1), (1, 2)], &[(1, 3)]);
        assert_eq!(m.parents(1).to_vec(), vec![0]);
        assert_eq!(m.children(1).to_vec(), vec![2]);
        assert_eq!(m.undirected_neighbors(1).to_vec(), vec![3]);
        assert_eq!(m.neighbors(1).to_vec(), vec![0, 2, 3]);
        assert_eq!(m.max_degree(), 3);
        assert!(!m.has_directed_cycle());
        assert!(g(3, &[(0, 1), (1, 2), (2, 0)], &[]).has_directed_cycle());
    }
}
