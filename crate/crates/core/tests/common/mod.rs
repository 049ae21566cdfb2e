#![allow(dead_code)]

use gtqc_core::lift::random_connected_graph;
use gtqc_core::Graph;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn graph(n: usize, extra: usize, seed: u64) -> Graph {
    random_connected_graph(n, extra, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

/// Connected graph with `lo..=hi` nodes.
pub fn arb_graph(lo: usize, hi: usize) -> impl Strategy<Value = Graph> {
    (lo..=hi, 0usize..6, any::<u64>()).prop_map(|(n, extra, seed)| graph(n, extra, seed))
}

/// Graph together with a permutation of its nodes.
pub fn arb_permuted(lo: usize, hi: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    (arb_graph(lo, hi), any::<u64>()).prop_map(|(g, s)| {
        let p = permutation(g.n_nodes(), s);
        (g, p)
    })
}

pub fn arb_angles(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..std::f64::consts::TAU, len)
}
