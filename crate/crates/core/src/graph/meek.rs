use super::{Mark, MixedGraph};

/// Applies the four Meek orientation rules until nothing changes.
///
/// Only undirected edges are ever oriented, so directed input edges and the
/// skeleton are preserved.
pub fn meek_closure(g: &MixedGraph) -> MixedGraph {
    let order = g.undirected_edges();
    meek_closure_in_order(g, &order)
}

/// Meek closure that scans candidate edges in the given order on every pass.
///
/// The result does not depend on the order for inputs whose directed edges
/// come from a DAG; this entry point exists so that can be checked.
pub fn meek_closure_in_order(g: &MixedGraph, order: &[(usize, usize)]) -> MixedGraph {
    let mut out = g.clone();
    loop {
        let mut changed = false;
        for &(i, j) in order {
            if !out.has_undirected(i, j) {
                continue;
            }
            if should_orient(&out, i, j) {
                out.orient(i, j);
                changed = true;
            } else if should_orient(&out, j, i) {
                out.orient(j, i);
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Whether some rule forces the undirected edge `a - b` into `a -> b`.
fn should_orient(g: &MixedGraph, a: usize, b: usize) -> bool {
    rule1(g, a, b) || rule2(g, a, b) || rule3(g, a, b) || rule4(g, a, b)
}

// R1: c -> a - b, c and b nonadjacent.
fn rule1(g: &MixedGraph, a: usize, b: usize) -> bool {
    g.parents(a).iter().any(|c| c != b && !g.is_adjacent(c, b))
}

// R2: a -> c -> b with a - b.
fn rule2(g: &MixedGraph, a: usize, b: usize) -> bool {
    g.children(a).iter().any(|c| g.has_directed(c, b))
}

// R3: a - c -> b, a - d -> b, c and d nonadjacent.
fn rule3(g: &MixedGraph, a: usize, b: usize) -> bool {
    let cands: Vec<usize> = g
        .undirected_neighbors(a)
        .iter()
        .filter(|&c| c != b && g.has_directed(c, b))
        .collect();
    for (k, &c) in cands.iter().enumerate() {
        for &d in &cands[k + 1..] {
            if !g.is_adjacent(c, d) {
                return true;
            }
        }
    }
    false
}

// R4: a - c -> d -> b, c and b nonadjacent, a adjacent to d.
fn rule4(g: &MixedGraph, a: usize, b: usize) -> bool {
    for c in g.undirected_neighbors(a).iter() {
        if c == b || g.is_adjacent(c, b) {
            continue;
        }
        for d in g.children(c).iter() {
            if d != a && g.has_directed(d, b) && g.mark(a, d) != Mark::None {
                return true;
            }
        }
    }
    false
}
