use super::{meek_closure, Mark, MixedGraph};
use crate::error::{Error, Result};
use crate::varset::VarSet;

/// A directed acyclic graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    graph: MixedGraph,
}

impl Dag {
    pub fn new(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Dag::try_from_mixed(MixedGraph::from_edges(p, edges, &[])?)
    }

    /// Graph with no edges.
    pub fn empty(p: usize) -> Self {
        Dag {
            graph: MixedGraph::new(p),
        }
    }

    /// Accepts a mixed graph whose edges are all directed and acyclic.
    pub fn try_from_mixed(graph: MixedGraph) -> Result<Self> {
        if let Some(&(i, j)) = graph.undirected_edges().first() {
            return Err(Error::InvalidEdge(i, j, graph.p()));
        }
        if graph.has_directed_cycle() {
            return Err(Error::Cycle);
        }
        Ok(Dag { graph })
    }

    pub fn with_names(self, names: Option<Vec<String>>) -> Self {
        Dag {
            graph: self.graph.with_names(names),
        }
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }

    pub fn as_mixed(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn into_mixed(self) -> MixedGraph {
        self.graph
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.graph.directed_edges()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.skeleton().len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.graph.has_directed(i, j)
    }

    pub fn parents(&self, i: usize) -> VarSet {
        self.graph.parents(i)
    }

    pub fn children(&self, i: usize) -> VarSet {
        self.graph.children(i)
    }

    pub fn topological_order(&self) -> Vec<usize> {
        self.graph.directed_topological_order().expect("Dag invariant: acyclic")
    }

    /// Unshielded colliders `(a, c, b)` meaning `a -> c <- b` with `a < b`
    /// and `a`, `b` nonadjacent.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        v_structures_of(&self.graph)
    }

    /// Same skeleton and same v-structures.
    pub fn is_markov_equivalent(&self, other: &Dag) -> bool {
        self.graph.skeleton_difference(&other.graph).is_none() && self.v_structures() == other.v_structures()
    }

    pub fn permuted(&self, perm: &[usize]) -> Dag {
        Dag {
            graph: self.graph.permuted(perm),
        }
    }
}

pub(crate) fn v_structures_of(g: &MixedGraph) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for c in 0..g.p() {
        let pa: Vec<usize> = g.parents(c).to_vec();
        for (k, &a) in pa.iter().enumerate() {
            for &b in &pa[k + 1..] {
                if !g.is_adjacent(a, b) {
                    out.push((a, c, b));
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// CPDAG of `dag`: skeleton, v-structures, then Meek closure.
pub fn essential_graph(dag: &Dag) -> MixedGraph {
    let mut g = dag.graph.undirected_skeleton();
    for (a, c, b) in dag.v_structures() {
        g.set(a, c, Mark::Out);
        g.set(b, c, Mark::Out);
    }
    meek_closure(&g)
}
