//! Laplacian eigenmaps: positional node features from the lowest
//! eigenvectors of the combinatorial Laplacian.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Eigenvalues within this distance are treated as degenerate when ordering.
const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct Eigenmaps {
    /// Ascending eigenvalues, one per column of `vectors`.
    pub eigenvalues: Vec<f64>,
    /// `n_nodes × k`, unit-norm columns with their first nonzero entry positive.
    pub vectors: DMatrix<f64>,
}

pub fn laplacian_eigenmaps(g: &Graph, k: usize) -> Result<Eigenmaps> {
    let n = g.n_nodes();
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenvectors from a graph with {n} nodes"
        )));
    }
    let eig = SymmetricEigen::new(g.laplacian());
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|c| {
            let mut v = eig.eigenvectors.column(c).into_owned();
            v /= v.norm();
            fix_sign(&mut v);
            (eig.eigenvalues[c], v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() > TIE_TOL {
            a.0.total_cmp(&b.0)
        } else {
            lexicographic(&a.1, &b.1)
        }
    });
    pairs.truncate(k);
    let mut vectors = DMatrix::zeros(n, k);
    for (c, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(c, v);
    }
    Ok(Eigenmaps {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        vectors,
    })
}

fn fix_sign(v: &mut DVector<f64>) {
    if let Some(&first) = v.iter().find(|x| x.abs() > TIE_TOL) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > TIE_TOL {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}
