//! 1-dimensional Weisfeiler-Lehman color refinement and a small exact
//! isomorphism test built on top of it.

use std::collections::BTreeMap;

use crate::graph::Graph;

/// Runs color refinement jointly on several graphs, so that colors share
/// one palette and are comparable across graphs.
///
/// Returns the color of every node of every graph after each round, starting
/// with round 0 (uniform colors). Stops once a round no longer splits any
/// class, or after `max_iters` rounds.
pub fn refine_jointly(graphs: &[&Graph], max_iters: usize) -> Vec<Vec<Vec<usize>>> {
    let mut colors: Vec<Vec<usize>> = graphs.iter().map(|g| vec![0; g.n_nodes()]).collect();
    let mut rounds = vec![colors.clone()];
    let mut n_classes = 1;
    for _ in 0..max_iters {
        let mut palette: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let signatures: Vec<Vec<(usize, Vec<usize>)>> = graphs
            .iter()
            .zip(&colors)
            .map(|(g, c)| {
                (0..g.n_nodes())
                    .map(|v| {
                        let mut neigh: Vec<usize> = g.neighbors(v).iter().map(|&w| c[w]).collect();
                        neigh.sort_unstable();
                        (c[v], neigh)
                    })
                    .collect()
            })
            .collect();
        for sig in signatures.iter().flatten() {
            let next = palette.len();
            palette.entry(sig.clone()).or_insert(next);
        }
        colors = signatures
            .iter()
            .map(|sigs| sigs.iter().map(|s| palette[s]).collect())
            .collect();
        rounds.push(colors.clone());
        if palette.len() == n_classes {
            break;
        }
        n_classes = palette.len();
    }
    rounds
}

fn histogram(colors: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// True iff 1-WL refinement from uniform colors yields identical color
/// histograms for both graphs in every round.
pub fn wl_indistinguishable(g1: &Graph, g2: &Graph, max_iters: usize) -> bool {
    if g1.n_nodes() != g2.n_nodes() {
        return false;
    }
    refine_jointly(&[g1, g2], max_iters)
        .iter()
        .all(|round| histogram(&round[0]) == histogram(&round[1]))
}

/// Stable 1-WL colors of a single graph, relabeled densely in order of
/// first appearance.
pub fn wl_colors(g: &Graph) -> Vec<usize> {
    let rounds = refine_jointly(&[g], g.n_nodes() + 1);
    let last = &rounds.last().expect("at least one round")[0];
    let mut dense = BTreeMap::new();
    last.iter()
        .map(|&c| {
            let next = dense.len();
            *dense.entry(c).or_insert(next)
        })
        .collect()
}

/// Exact isomorphism test by backtracking over WL color classes.
///
/// Intended for small graphs (a few dozen nodes); exponential in the worst case.
pub fn are_isomorphic(g1: &Graph, g2: &Graph) -> bool {
    find_isomorphism(g1, g2).is_some()
}

/// Returns `map` with `map[v]` the image in `g2` of node `v` of `g1`.
pub fn find_isomorphism(g1: &Graph, g2: &Graph) -> Option<Vec<usize>> {
    let n = g1.n_nodes();
    if n != g2.n_nodes() || g1.n_edges() != g2.n_edges() {
        return None;
    }
    let rounds = refine_jointly(&[g1, g2], n + 1);
    let last = rounds.last().expect("at least one round");
    let (c1, c2) = (&last[0], &last[1]);
    let h1 = histogram(c1);
    if h1 != histogram(c2) {
        return None;
    }

    // most constrained first: prefer nodes with many already-ordered
    // neighbours, then rare colors
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| (std::cmp::Reverse(links[v]), h1[&c1[v]], v))
            .expect("unplaced node");
        placed[v] = true;
        order.push(v);
        for &w in g1.neighbors(v) {
            links[w] += 1;
        }
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if extend(0, &order, g1, g2, c1, c2, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn extend(
    depth: usize,
    order: &[usize],
    g1: &Graph,
    g2: &Graph,
    c1: &[usize],
    c2: &[usize],
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    let mapped = &order[..depth];
    for w in 0..g2.n_nodes() {
        if used[w] || c2[w] != c1[v] {
            continue;
        }
        let consistent = mapped
            .iter()
            .all(|&u| g1.has_edge(v, u) == g2.has_edge(w, map[u]));
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(depth + 1, order, g1, g2, c1, c2, map, used) {
            return true;
        }
        used[w] = false;
        map[v] = usize::MAX;
    }
    false
}
