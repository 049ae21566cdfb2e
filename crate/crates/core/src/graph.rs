//! Undirected simple graphs with optional node features and labels.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An undirected graph on nodes `0..n` without self-loops or multi-edges.
///
/// Edges are stored normalized as `(i, j)` with `i < j`, sorted
/// lexicographically, so two graphs with the same edge set compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    features: Option<DMatrix<f64>>,
    node_labels: Option<Vec<usize>>,
    graph_label: Option<usize>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (k, (i, j)) in edges.into_iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {k} ({i}, {j}) has an endpoint outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("edge {k} ({i}, {j}) is a self-loop")));
            }
            if !set.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!("edge {k} ({i}, {j}) is duplicated")));
            }
        }
        Ok(Self::from_normalized(n, set.into_iter().collect()))
    }

    /// Like [`Graph::new`] but silently drops duplicate edges (either orientation).
    pub fn new_dedup(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        Self::new(n, set)
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        Self {
            n,
            edges,
            adjacency,
            features: None,
            node_labels: None,
            graph_label: None,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Normalized edges `(i, j)` with `i < j`, lexicographically sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|row| row.binary_search(&j).is_ok())
    }

    pub fn features(&self) -> Option<&DMatrix<f64>> {
        self.features.as_ref()
    }

    pub fn node_labels(&self) -> Option<&[usize]> {
        self.node_labels.as_deref()
    }

    pub fn graph_label(&self) -> Option<usize> {
        self.graph_label
    }

    pub fn with_features(mut self, features: DMatrix<f64>) -> Result<Self> {
        if features.nrows() != self.n {
            return Err(Error::InvalidGraph(format!(
                "feature matrix has {} rows for {} nodes",
                features.nrows(),
                self.n
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn with_node_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_graph_label(mut self, label: usize) -> Self {
        self.graph_label = Some(label);
        self
    }

    pub fn clear_features(mut self) -> Self {
        self.features = None;
        self
    }

    /// Feature matrix, or a single constant column of ones when none is attached.
    pub fn features_or_uniform(&self) -> DMatrix<f64> {
        self.features
            .clone()
            .unwrap_or_else(|| DMatrix::from_element(self.n, 1, 1.0))
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// Combinatorial Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = -self.adjacency_matrix();
        for v in 0..self.n {
            l[(v, v)] = self.degree(v) as f64;
        }
        l
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    /// Relabels node `i` as `perm[i]`; features and labels move with their nodes.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph> {
        check_permutation(perm, self.n)?;
        let edges: BTreeSet<_> = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (perm[i], perm[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        let mut out = Self::from_normalized(self.n, edges.into_iter().collect());
        if let Some(f) = &self.features {
            let mut g = DMatrix::zeros(f.nrows(), f.ncols());
            for i in 0..self.n {
                g.set_row(perm[i], &f.row(i));
            }
            out.features = Some(g);
        }
        if let Some(l) = &self.node_labels {
            let mut m = vec![0; self.n];
            for i in 0..self.n {
                m[perm[i]] = l[i];
            }
            out.node_labels = Some(m);
        }
        out.graph_label = self.graph_label;
        Ok(out)
    }

    /// Disjoint union, with `other`'s nodes shifted by `self.n_nodes()`.
    /// Features and labels are dropped.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(i, j)| (i + off, j + off)))
            .collect();
        Self::from_normalized(self.n + other.n, edges)
    }
}

/// Free-function form of [`Graph::permute`].
pub fn permute_graph(g: &Graph, perm: &[usize]) -> Result<Graph> {
    g.permute(perm)
}

/// Verifies `perm` is a bijection on `0..n`.
pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation has length {} for {n} nodes",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a bijection on 0..{n}"
            )));
        }
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Path graph `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
}

/// Cycle graph on `n >= 3` nodes.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (0, i))).expect("valid star")
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).expect("valid clique")
}
