//! Covering graphs (k-lifts) and the WL-hard GraphCovers dataset built
//! from them.
//!
//! Node `u` of the base becomes nodes `u*k .. u*k + k` of the lift; base edge
//! `(u, v)` with permutation `π` becomes the `k` edges `(u_a, v_π(a))`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::wl::are_isomorphic;

/// Parameters of a random lift.
#[derive(Debug, Clone)]
pub struct LiftSpec {
    pub base: Graph,
    pub degree: usize,
    pub seed: u64,
}

/// Lift with explicit per-edge permutations, one per base edge in
/// [`Graph::edges`] order.
pub fn lift_with_permutations(base: &Graph, k: usize, perms: &[Vec<usize>]) -> Result<Graph> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("lift degree must be >= 2, got {k}")));
    }
    if perms.len() != base.n_edges() {
        return Err(Error::InvalidArgument(format!(
            "{} permutations for {} base edges",
            perms.len(),
            base.n_edges()
        )));
    }
    let mut edges = Vec::with_capacity(k * base.n_edges());
    for (&(u, v), perm) in base.edges().iter().zip(perms) {
        crate::graph::check_permutation(perm, k)?;
        for (a, &b) in perm.iter().enumerate() {
            edges.push((u * k + a, v * k + b));
        }
    }
    Graph::new(base.n_nodes() * k, edges)
}

/// Draws a uniformly random permutation per base edge from `spec.seed`.
pub fn random_lift(spec: &LiftSpec) -> Result<Graph> {
    if spec.degree < 2 {
        return Err(Error::InvalidArgument(format!(
            "lift degree must be >= 2, got {}",
            spec.degree
        )));
    }
    if !spec.base.is_connected() {
        return Err(Error::InvalidGraph("lift base must be connected".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let perms = random_permutations(&mut rng, spec.base.n_edges(), spec.degree);
    lift_with_permutations(&spec.base, spec.degree, &perms)
}

fn random_permutations(rng: &mut impl Rng, count: usize, k: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let mut p: Vec<usize> = (0..k).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

/// Maps every lift edge back to the base and returns the resulting edge
/// multiset (each base edge appears `k` times).
pub fn project_to_base(lift: &Graph, k: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = lift
        .edges()
        .iter()
        .map(|&(i, j)| {
            let (u, v) = (i / k, j / k);
            (u.min(v), u.max(v))
        })
        .collect();
    out.sort_unstable();
    out
}

/// Random connected graph on `n` nodes: a random spanning tree plus
/// `extra_edges` additional random edges.
pub fn random_connected_graph(n: usize, extra_edges: usize, rng: &mut impl Rng) -> Result<Graph> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        let (a, b) = (order[i], parent);
        edges.insert((a.min(b), a.max(b)));
    }
    let max_edges = n * (n - 1) / 2;
    let target = (edges.len() + extra_edges).min(max_edges);
    while edges.len() < target {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    Graph::new(n, edges)
}

/// Settings for the GraphCovers generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoversSpec {
    pub nodes: usize,
    pub classes: usize,
    pub per_class: usize,
    pub lift_degree: usize,
    pub seed: u64,
}

impl Default for CoversSpec {
    fn default() -> Self {
        Self {
            nodes: 21,
            classes: 3,
            per_class: 2,
            lift_degree: 3,
            seed: 0,
        }
    }
}

const MAX_ATTEMPTS: usize = 10_000;

/// Pairwise non-isomorphic connected lifts of one random non-regular base,
/// labeled in consecutive blocks of `per_class`.
///
/// All outputs are lifts of the same base with the same degree, so they are
/// mutually 1-WL-indistinguishable.
pub fn graph_covers(spec: &CoversSpec) -> Result<Vec<Graph>> {
    let k = spec.lift_degree;
    if k < 2 {
        return Err(Error::InvalidArgument(format!("lift degree must be >= 2, got {k}")));
    }
    if spec.nodes % k != 0 || spec.nodes / k < 3 {
        return Err(Error::InvalidArgument(format!(
            "{} nodes cannot be split into a lift of degree {k} over a base of >= 3 nodes",
            spec.nodes
        )));
    }
    if spec.classes == 0 || spec.per_class == 0 {
        return Err(Error::InvalidArgument("classes and per-class must be positive".into()));
    }
    let base_n = spec.nodes / k;
    let wanted = spec.classes * spec.per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // one edge short of complete, so a non-regular base exists
    let extra = (base_n / 2 + 1).min(base_n * (base_n - 1) / 2 - base_n);
    let base = (0..MAX_ATTEMPTS)
        .map(|_| random_connected_graph(base_n, extra, &mut rng))
        .find(|g| {
            g.as_ref()
                .map_or(true, |g| (0..base_n).any(|v| g.degree(v) != g.degree(0)))
        })
        .ok_or_else(|| Error::InvalidArgument("no non-regular base graph found".into()))??;

    let mut out: Vec<Graph> = Vec::with_capacity(wanted);
    for _ in 0..MAX_ATTEMPTS {
        if out.len() == wanted {
            break;
        }
        let perms = random_permutations(&mut rng, base.n_edges(), k);
        let g = lift_with_permutations(&base, k, &perms)?;
        if !g.is_connected() || out.iter().any(|h| are_isomorphic(h, &g)) {
            continue;
        }
        out.push(g);
    }
    if out.len() < wanted {
        return Err(Error::InvalidArgument(format!(
            "found only {} non-isomorphic lifts out of {wanted} requested",
            out.len()
        )));
    }
    Ok(out
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.with_graph_label(i / spec.per_class))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle;
    use crate::wl::wl_indistinguishable;

    #[test]
    fn identity_lift_of_triangle_is_two_triangles() {
        let id = vec![vec![0, 1]; 3];
        let g = lift_with_permutations(&cycle(3), 2, &id).unwrap();
        assert_eq!(g.n_nodes(), 6);
        assert!(!g.is_connected());
        assert!(are_isomorphic(&g, &cycle(3).disjoint_union(&cycle(3))));
    }

    #[test]
    fn one_twisted_edge_gives_hexagon() {
        // base edges (0,1), (0,2), (1,2); twist the last one
        let perms = vec![vec![0, 1], vec![0, 1], vec![1, 0]];
        let g = lift_with_permutations(&cycle(3), 2, &perms).unwrap();
        // hand-enumerated: 0a-1a, 0b-1b, 0a-2a, 0b-2b, 1a-2b, 1b-2a
        let expected = Graph::new(6, [(0, 2), (1, 3), (0, 4), (1, 5), (2, 5), (3, 4)]).unwrap();
        assert_eq!(g, expected);
        assert!(are_isomorphic(&g, &cycle(6)));
    }

    #[test]
    fn degree_below_two_is_rejected() {
        let spec = LiftSpec { base: cycle(4), degree: 1, seed: 0 };
        assert!(random_lift(&spec).is_err());
    }

    #[test]
    fn lift_is_deterministic_and_projects_to_base() {
        let base = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let spec = LiftSpec { base: base.clone(), degree: 3, seed: 11 };
        let a = random_lift(&spec).unwrap();
        assert_eq!(a, random_lift(&spec).unwrap());
        assert_eq!(a.n_nodes(), 15);
        let mut expected: Vec<_> = base.edges().iter().flat_map(|&e| [e; 3]).collect();
        expected.sort_unstable();
        assert_eq!(project_to_base(&a, 3), expected);
    }

    #[test]
    fn lifts_of_one_base_are_wl_equivalent() {
        let base = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let lifts: Vec<Graph> = (0..6)
            .map(|seed| random_lift(&LiftSpec { base: base.clone(), degree: 2, seed }).unwrap())
            .collect();
        for a in &lifts {
            for b in &lifts {
                assert!(wl_indistinguishable(a, b, 50));
            }
        }
    }
}
