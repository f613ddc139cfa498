//! Local orientation from single- and auxiliary-set regression invariance.

use log::{debug, warn};
use serde::Serialize;

use super::oracle::{InvarianceOracle, SampleOracle};
use super::skeleton::pc_from_moments;
use super::{check_environments, env_pairs, SkeletonOptions};
use crate::error::{Error, Result};
use crate::graph::{meek_closure, MixedGraph};
use crate::invariance::neighbor_corrected_alpha;
use crate::sem::EnvironmentData;
use crate::stats::Moments;
use crate::varset::VarSet;

#[derive(Clone, Debug, PartialEq)]
pub struct LreOptions {
    pub alpha: f64,
    pub skeleton: SkeletonOptions,
    /// Largest auxiliary set searched; unbounded when `None`.
    pub max_fixing_size: Option<usize>,
    /// Fail on the first conflicting decision instead of skipping it.
    pub strict: bool,
}

impl Default for LreOptions {
    fn default() -> Self {
        LreOptions {
            alpha: 0.01,
            skeleton: SkeletonOptions::default(),
            max_fixing_size: None,
            strict: false,
        }
    }
}

/// Which invariance pattern produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    /// `β_X(Y)` changes, `β_Y(X)` does not: `X` is a child of `Y`.
    ChildByReverse,
    /// `β_X(Y)` is fixed, `β_Y(X)` changes: `X` is a parent of `Y`.
    ParentByForward,
    /// Both change and no auxiliary set fixes `β_{S∪X}(Y)`.
    ChildNoFixingSet,
    /// Both `X` and `S` are needed to fix the coefficient.
    ParentsWithX,
    /// `S` alone already fixes it; `X` stays undecided.
    ParentsWithoutX,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decision {
    pub env_pair: (usize, usize),
    pub target: usize,
    pub neighbor: usize,
    pub rule: Rule,
    /// Directed edges `(from, to)` this decision asserts.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ConflictKind {
    /// The edge is already oriented the other way.
    Reversed { edge: (usize, usize) },
    /// Applying the decision closes a directed cycle.
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conflict {
    pub rejected: Decision,
    pub kind: ConflictKind,
    /// Earlier accepted decision that set the opposing orientation, if any.
    pub earlier: Option<Decision>,
}

#[derive(Clone, Debug)]
pub struct LreOutput {
    pub graph: MixedGraph,
    pub essential: MixedGraph,
    pub decisions: Vec<Decision>,
    pub conflicts: Vec<Conflict>,
}

/// Smallest `S ⊆ neighbors_of_y \ {x}` with `β_{S∪{x}}(y)` invariant,
/// searched by size and then lexicographically, together with whether
/// `β_S(y)` is invariant on its own.
pub fn minimal_fixing_set<O: InvarianceOracle + ?Sized>(
    y: usize,
    x: usize,
    neighbors_of_y: VarSet,
    oracle: &O,
    max_size: Option<usize>,
) -> Result<Option<(VarSet, bool)>> {
    if !neighbors_of_y.contains(x) {
        return Err(Error::InvalidRequest(format!("{x} is not a neighbor of {y}")));
    }
    let pool = neighbors_of_y.without(x).without(y);
    for s in pool.subsets_by_size(max_size.unwrap_or(usize::MAX)) {
        if oracle.is_invariant(y, s.with(x))? {
            return Ok(Some((s, oracle.is_invariant(y, s)?)));
        }
    }
    Ok(None)
}

/// Runs the orientation stages on data. The essential graph comes from
/// the pooled environments; each pair is then examined with F-tests at
/// `α / (p (2^Δ - 1))`.
pub fn lre(envs: &[EnvironmentData], opts: &LreOptions) -> Result<LreOutput> {
    check_environments(envs)?;
    let moments: Vec<Moments> = envs.iter().map(Moments::from_data).collect();
    let ess = pc_from_moments(&moments, &opts.skeleton)?
        .graph
        .with_names(Some(envs[0].names().to_vec()));
    let level = neighbor_corrected_alpha(opts.alpha, ess.p(), ess.max_degree());
    let oracles: Vec<_> = env_pairs(envs.len())
        .into_iter()
        .map(|(i, j)| {
            (
                (i, j),
                SampleOracle::from_moments(moments[i].clone(), moments[j].clone(), level),
            )
        })
        .collect();
    lre_from_essential(&ess, &oracles, opts)
}

/// Orientation stages on a given essential graph, one oracle per
/// environment pair, examined in the given order.
pub fn lre_from_essential<O: InvarianceOracle>(
    ess: &MixedGraph,
    oracles: &[((usize, usize), O)],
    opts: &LreOptions,
) -> Result<LreOutput> {
    let p = ess.p();
    let neighbors: Vec<VarSet> = (0..p).map(|v| ess.neighbors(v)).collect();
    let mut g = ess.clone();
    let mut decisions: Vec<Decision> = Vec::new();
    let mut conflicts = Vec::new();
    for (pair, oracle) in oracles {
        if oracle.p() != p {
            return Err(Error::Contract(format!(
                "oracle over {} variables, graph over {p}",
                oracle.p()
            )));
        }
        for y in 0..p {
            for x in g.undirected_neighbors(y).iter() {
                if !g.has_undirected(x, y) {
                    continue;
                }
                let Some((rule, edges)) = examine(y, x, neighbors[y], oracle, opts.max_fixing_size)? else {
                    continue;
                };
                let d = Decision {
                    env_pair: *pair,
                    target: y,
                    neighbor: x,
                    rule,
                    edges,
                };
                match apply(&mut g, &d) {
                    Ok(()) => {
                        debug!("{:?}: {:?} gives {:?}", d.env_pair, d.rule, d.edges);
                        decisions.push(d);
                    }
                    Err(kind) => {
                        let earlier = match &kind {
                            ConflictKind::Reversed { edge: (a, b) } => {
                                decisions.iter().find(|e| e.edges.contains(&(*b, *a))).cloned()
                            }
                            ConflictKind::Cycle => None,
                        };
                        warn!("skipping conflicting decision {d:?} ({kind:?}); earlier: {earlier:?}");
                        if opts.strict {
                            let (a, b) = match kind {
                                ConflictKind::Reversed { edge } => edge,
                                ConflictKind::Cycle => (d.neighbor, d.target),
                            };
                            return Err(Error::OrientationConflict(a, b));
                        }
                        conflicts.push(Conflict {
                            rejected: d,
                            kind,
                            earlier,
                        });
                    }
                }
            }
        }
    }
    Ok(LreOutput {
        graph: meek_closure(&g),
        essential: ess.clone(),
        decisions,
        conflicts,
    })
}

/// A rule together with the edges it orients.
type Step = (Rule, Vec<(usize, usize)>);

fn examine<O: InvarianceOracle + ?Sized>(
    y: usize,
    x: usize,
    neighbors_of_y: VarSet,
    oracle: &O,
    max_size: Option<usize>,
) -> Result<Option<Step>> {
    let y_on_x = oracle.is_invariant(y, VarSet::singleton(x))?;
    let x_on_y = oracle.is_invariant(x, VarSet::singleton(y))?;
    Ok(match (y_on_x, x_on_y) {
        (true, true) => None,
        (false, true) => Some((Rule::ChildByReverse, vec![(y, x)])),
        (true, false) => Some((Rule::ParentByForward, vec![(x, y)])),
        (false, false) => match minimal_fixing_set(y, x, neighbors_of_y, oracle, max_size)? {
            None => Some((Rule::ChildNoFixingSet, vec![(y, x)])),
            Some((s, false)) => Some((Rule::ParentsWithX, s.with(x).iter().map(|w| (w, y)).collect())),
            Some((s, true)) => Some((Rule::ParentsWithoutX, s.iter().map(|w| (w, y)).collect())),
        },
    })
}

/// All-or-nothing application of a decision's edges.
fn apply(g: &mut MixedGraph, d: &Decision) -> std::result::Result<(), ConflictKind> {
    let mut trial = g.clone();
    for &(a, b) in &d.edges {
        if trial.has_directed(b, a) || !trial.is_adjacent(a, b) {
            return Err(ConflictKind::Reversed { edge: (a, b) });
        }
        trial.orient(a, b);
    }
    if trial.has_directed_cycle() {
        return Err(ConflictKind::Cycle);
    }
    *g = trial;
    Ok(())
}
