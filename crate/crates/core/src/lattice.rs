//! Finite patches of the square, triangular, honeycomb and kagome lattices,
//! labeled with an antiferromagnetic (Ising ground-state) pattern.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::ground::ising_ground_states;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Square,
    Triangular,
    Honeycomb,
    Kagome,
}

impl LatticeKind {
    pub const ALL: [LatticeKind; 4] = [
        LatticeKind::Square,
        LatticeKind::Triangular,
        LatticeKind::Honeycomb,
        LatticeKind::Kagome,
    ];
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Square => "square",
            Self::Triangular => "triangular",
            Self::Honeycomb => "honeycomb",
            Self::Kagome => "kagome",
        };
        f.write_str(s)
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(Self::Square),
            "triangular" => Ok(Self::Triangular),
            "honeycomb" => Ok(Self::Honeycomb),
            "kagome" => Ok(Self::Kagome),
            other => Err(Error::InvalidArgument(format!("unknown lattice kind {other:?}"))),
        }
    }
}

/// A patch of `rows × cols` whole cells.
///
/// Cells are unit squares (square), rhombi of two triangles (triangular),
/// hexagons (honeycomb) and up-triangles of the kagome basis (kagome).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub rows: usize,
    pub cols: usize,
}

impl LatticeSpec {
    pub fn new(kind: LatticeKind, rows: usize, cols: usize) -> Self {
        Self { kind, rows, cols }
    }
}

/// Builds the lattice graph with binary antiferromagnetic node labels.
///
/// Square and honeycomb labels are a proper 2-coloring. Triangular labels
/// tile the lowest-index Ising ground state of a rhombic cell; kagome labels
/// tile the triangle ground state that flips sublattice 1.
pub fn lattice_graph(spec: &LatticeSpec) -> Result<Graph> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidArgument("lattice needs at least one row and column".into()));
    }
    let (g, labels) = match spec.kind {
        LatticeKind::Square => square(spec.rows, spec.cols)?,
        LatticeKind::Triangular => triangular(spec.rows, spec.cols)?,
        LatticeKind::Honeycomb => honeycomb(spec.rows, spec.cols)?,
        LatticeKind::Kagome => kagome(spec.rows, spec.cols)?,
    };
    g.with_node_labels(labels)
}

fn grid_edges(rows: usize, cols: usize, diagonal: bool) -> Vec<(usize, usize)> {
    let w = cols + 1;
    let id = |r: usize, c: usize| r * w + c;
    let mut edges = Vec::new();
    for r in 0..=rows {
        for c in 0..=cols {
            if c < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
            if diagonal && r < rows && c < cols {
                edges.push((id(r, c), id(r + 1, c + 1)));
            }
        }
    }
    edges
}

fn square(rows: usize, cols: usize) -> Result<(Graph, Vec<usize>)> {
    let g = Graph::new((rows + 1) * (cols + 1), grid_edges(rows, cols, false))?;
    let labels = (0..g.n_nodes())
        .map(|v| (v / (cols + 1) + v % (cols + 1)) % 2)
        .collect();
    Ok((g, labels))
}

/// Lowest-index Ising ground state of `cell`, as one label per node.
fn cell_ground_pattern(cell: &Graph) -> Result<Vec<usize>> {
    let gs = ising_ground_states(cell)?;
    let x = gs.states[0];
    Ok((0..cell.n_nodes()).map(|v| (x >> v) & 1).collect())
}

fn triangular(rows: usize, cols: usize) -> Result<(Graph, Vec<usize>)> {
    let g = Graph::new((rows + 1) * (cols + 1), grid_edges(rows, cols, true))?;
    // one rhombic cell: nodes (0,0), (0,1), (1,0), (1,1)
    let cell = Graph::new(4, grid_edges(1, 1, true))?;
    let pattern = cell_ground_pattern(&cell)?;
    let labels = (0..g.n_nodes())
        .map(|v| {
            let (r, c) = (v / (cols + 1), v % (cols + 1));
            pattern[(r % 2) * 2 + c % 2]
        })
        .collect();
    Ok((g, labels))
}

/// Brick-wall embedding: columns of `2*rows + 2` nodes, two corner nodes
/// removed, node `(i, j)` colored by `(i + j) % 2`.
fn honeycomb(rows: usize, cols: usize) -> Result<(Graph, Vec<usize>)> {
    let height = 2 * rows + 2;
    let removed = [(0, height - 1), (cols, (height - 1) * (cols % 2))];
    let mut ids = BTreeMap::new();
    for i in 0..=cols {
        for j in 0..height {
            if !removed.contains(&(i, j)) {
                let next = ids.len();
                ids.insert((i, j), next);
            }
        }
    }
    let mut edges = Vec::new();
    let mut link = |a: (usize, usize), b: (usize, usize)| {
        if let (Some(&x), Some(&y)) = (ids.get(&a), ids.get(&b)) {
            edges.push((x, y));
        }
    };
    for i in 0..=cols {
        for j in 0..height - 1 {
            link((i, j), (i, j + 1));
        }
    }
    for i in 0..cols {
        for j in 0..height {
            if i % 2 == j % 2 {
                link((i, j), (i + 1, j));
            }
        }
    }
    let g = Graph::new(ids.len(), edges)?;
    let mut labels = vec![0; ids.len()];
    for (&(i, j), &v) in &ids {
        labels[v] = (i + j) % 2;
    }
    Ok((g, labels))
}

/// Kagome patch: cell `(x, y)` holds sites A, B, C forming an up-triangle;
/// down-triangles join B(x,y)-A(x+1,y), C(x,y)-A(x,y+1), B(x,y)-C(x+1,y-1).
/// On patches of at least 2x2 cells, B and C of the last cell are dropped:
/// they would hang off A as a pair with identical closed neighborhoods.
fn kagome(rows: usize, cols: usize) -> Result<(Graph, Vec<usize>)> {
    let id = |x: usize, y: usize, s: usize| 3 * (y * cols + x) + s;
    let n = if rows >= 2 && cols >= 2 { 3 * rows * cols - 2 } else { 3 * rows * cols };
    let mut edges = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            edges.push((id(x, y, 0), id(x, y, 1)));
            edges.push((id(x, y, 0), id(x, y, 2)));
            edges.push((id(x, y, 1), id(x, y, 2)));
            if x + 1 < cols {
                edges.push((id(x, y, 1), id(x + 1, y, 0)));
            }
            if y + 1 < rows {
                edges.push((id(x, y, 2), id(x, y + 1, 0)));
            }
            if x + 1 < cols && y >= 1 {
                edges.push((id(x, y, 1), id(x + 1, y - 1, 2)));
            }
        }
    }
    edges.retain(|&(i, j)| i < n && j < n);
    let g = Graph::new(n, edges)?;
    // the ground state flipping sublattice 1; sublattices 1 and 2 are mirror
    // images on square patches, so the labeling is not 1-WL separable
    let cell = Graph::new(3, [(0, 1), (0, 2), (1, 2)])?;
    let flip_one = 0b010;
    if !ising_ground_states(&cell)?.states.contains(&flip_one) {
        return Err(Error::Numerical("kagome cell pattern is not a ground state".into()));
    }
    let labels = (0..g.n_nodes()).map(|v| (v % 3 == 1) as usize).collect();
    Ok((g, labels))
}
