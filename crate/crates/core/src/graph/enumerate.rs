use super::dag::v_structures_of;
use super::{Dag, MixedGraph};
use crate::error::{Error, Result};

pub const DEFAULT_EXTENSION_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionOptions {
    /// Largest number of undirected edges that may be enumerated.
    pub max_undirected: usize,
    /// Only yield extensions that create no v-structure absent from the
    /// input's directed part. Off by default: consistency means only that no
    /// directed edge of the input is reversed.
    pub markov_only: bool,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            max_undirected: DEFAULT_EXTENSION_CAP,
            markov_only: false,
        }
    }
}

/// Every acyclic orientation of the undirected edges of `g` that keeps all
/// of its directed edges.
pub fn consistent_dag_extensions(g: &MixedGraph, opts: &ExtensionOptions) -> Result<Extensions> {
    let undirected = g.undirected_edges();
    if undirected.len() > opts.max_undirected {
        return Err(Error::EnumerationTooLarge {
            needed: undirected.len(),
            cap: opts.max_undirected,
        });
    }
    let base_v = opts.markov_only.then(|| v_structures_of(g));
    Ok(Extensions {
        base: g.clone(),
        end: 1u64 << undirected.len(),
        undirected,
        next: 0,
        base_v,
    })
}

/// Lazy stream of consistent extensions, in orientation-bitmask order.
#[derive(Debug)]
pub struct Extensions {
    base: MixedGraph,
    undirected: Vec<(usize, usize)>,
    next: u64,
    end: u64,
    base_v: Option<Vec<(usize, usize, usize)>>,
}

impl Iterator for Extensions {
    type Item = Dag;

    fn next(&mut self) -> Option<Dag> {
        while self.next < self.end {
            let mask = self.next;
            self.next += 1;
            let mut g = self.base.clone();
            for (k, &(i, j)) in self.undirected.iter().enumerate() {
                if mask & (1 << k) == 0 {
                    g.orient(i, j);
                } else {
                    g.orient(j, i);
                }
            }
            if g.has_directed_cycle() {
                continue;
            }
            if let Some(base_v) = &self.base_v {
                if v_structures_of(&g) != *base_v {
                    continue;
                }
            }
            return Some(Dag::try_from_mixed(g).expect("acyclic and fully directed"));
        }
        None
    }
}
