//! Exhaustive Ising ground states and the hard-core walk graphs of the XY
//! model's Hamming-weight sectors.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::hamiltonian::ising_energies;
use crate::quantum::state::check_size;

/// Minimum Ising energy and every basis index attaining it (ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundStates {
    pub energy: i32,
    pub states: Vec<usize>,
}

/// Scans all `2^N` computational basis states of `sum_{(i,j)} s_i s_j`.
pub fn ising_ground_states(g: &Graph) -> Result<GroundStates> {
    check_size(g.n_nodes())?;
    let energies = ising_energies(g.n_nodes(), g.edges());
    let energy = *energies.iter().min().expect("nonempty register");
    let states = energies
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e == energy)
        .map(|(x, _)| x)
        .collect();
    Ok(GroundStates { energy, states })
}

/// Largest sector the walk-graph builder will enumerate.
pub const MAX_SECTOR_DIM: u64 = 1 << 20;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Basis indices of Hamming weight `n` among `n_qubits` qubits, ascending.
pub fn sector_states(n_qubits: usize, weight: usize) -> Vec<usize> {
    (0..1usize << n_qubits)
        .filter(|x| x.count_ones() as usize == weight)
        .collect()
}

/// Graph whose vertices are the weight-`n` basis states (in ascending index
/// order) and whose edges join states coupled by one hop of an excitation
/// along an edge of `g`.
pub fn hardcore_walk_graph(g: &Graph, n: usize) -> Result<Graph> {
    let big_n = g.n_nodes();
    if n == 0 || n >= big_n {
        return Err(Error::InvalidArgument(format!(
            "occupation must satisfy 0 < n < {big_n}, got {n}"
        )));
    }
    let dim = binomial(big_n, n);
    if dim > MAX_SECTOR_DIM {
        return Err(Error::InvalidArgument(format!(
            "sector of dimension {dim} exceeds {MAX_SECTOR_DIM}"
        )));
    }
    let states = sector_states(big_n, n);
    let index: HashMap<usize, usize> = states.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    let mut edges = Vec::new();
    for (a, &x) in states.iter().enumerate() {
        for &(i, j) in g.edges() {
            let mask = (1 << i) | (1 << j);
            if (x & mask).count_ones() == 1 {
                let b = index[&(x ^ mask)];
                if a < b {
                    edges.push((a, b));
                }
            }
        }
    }
    Graph::new(states.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, path};
    use crate::wl::are_isomorphic;

    #[test]
    fn path_ground_states() {
        let gs = ising_ground_states(&path(3)).unwrap();
        assert_eq!(gs.energy, -2);
        assert_eq!(gs.states, vec![0b010, 0b101]);
    }

    #[test]
    fn triangle_is_frustrated() {
        let gs = ising_ground_states(&cycle(3)).unwrap();
        assert_eq!(gs.energy, -1);
        assert_eq!(gs.states, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn square_has_two_neel_states() {
        let gs = ising_ground_states(&cycle(4)).unwrap();
        assert_eq!(gs.energy, -4);
        assert_eq!(gs.states, vec![0b0101, 0b1010]);
    }

    #[test]
    fn single_walker_recovers_the_graph() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let w = hardcore_walk_graph(&g, 1).unwrap();
        assert!(are_isomorphic(&w, &g));
        // basis state 1 << v is vertex v, so the map is the identity
        assert_eq!(w, g);
    }

    #[test]
    fn two_walkers_on_square() {
        let w = hardcore_walk_graph(&cycle(4), 2).unwrap();
        assert_eq!(w.n_nodes(), 6);
        let states = sector_states(4, 2);
        for (v, &x) in states.iter().enumerate() {
            let expected = if x == 0b0101 || x == 0b1010 { 4 } else { 2 };
            assert_eq!(w.degree(v), expected, "state {x:04b}");
        }
    }

    #[test]
    fn two_walkers_on_triangle() {
        let w = hardcore_walk_graph(&complete(3), 2).unwrap();
        assert!(are_isomorphic(&w, &cycle(3)));
    }

    #[test]
    fn bad_occupation() {
        assert!(hardcore_walk_graph(&path(3), 0).is_err());
        assert!(hardcore_walk_graph(&path(3), 3).is_err());
    }
}
