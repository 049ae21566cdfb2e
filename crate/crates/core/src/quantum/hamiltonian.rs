//! Hamiltonians whose interaction terms follow the edges of a graph.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::pauli::{Pauli, PauliString};
use crate::quantum::state::check_size;

/// Interaction type placed on every edge `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HamiltonianKind {
    /// `Z_i Z_j`
    Ising,
    /// `X_i X_j + Y_i Y_j`
    Xy,
    /// `X_i X_j + Y_i Y_j + J Z_i Z_j`, `J > 0`
    Xxz { j: f64 },
}

impl HamiltonianKind {
    pub fn xxz(j: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidArgument(format!("XXZ coupling must be > 0, got {j}")));
        }
        Ok(Self::Xxz { j })
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Self::Ising)
    }
}

impl fmt::Display for HamiltonianKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ising => write!(f, "ising"),
            Self::Xy => write!(f, "xy"),
            Self::Xxz { j } => write!(f, "xxz:{j}"),
        }
    }
}

impl FromStr for HamiltonianKind {
    type Err = Error;

    /// Accepts `ising`, `xy`, `xxz` (J = 1) and `xxz:<J>`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ising" => Ok(Self::Ising),
            "xy" => Ok(Self::Xy),
            "xxz" | "heisenberg" => Self::xxz(1.0),
            other => match other.strip_prefix("xxz:") {
                Some(j) => {
                    let j = j
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidArgument(format!("bad XXZ coupling {j:?}: {e}")))?;
                    Self::xxz(j)
                }
                None => Err(Error::InvalidArgument(format!("unknown Hamiltonian kind {s:?}"))),
            },
        }
    }
}

impl Serialize for HamiltonianKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HamiltonianKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sum of real-weighted Pauli strings sharing the topology of a graph.
#[derive(Debug, Clone)]
pub struct GraphHamiltonian {
    kind: HamiltonianKind,
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
    terms: Vec<(f64, PauliString)>,
    diagonal: Diagonal,
}

/// Lazily built Ising energies, shared by every evolution under one Hamiltonian.
#[derive(Clone, Default)]
struct Diagonal(OnceLock<Vec<i32>>);

impl fmt::Debug for Diagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0.get().is_some() { "Diagonal(cached)" } else { "Diagonal(empty)" })
    }
}

impl GraphHamiltonian {
    pub fn new(g: &Graph, kind: HamiltonianKind) -> Result<Self> {
        let n = g.n_nodes();
        check_size(n)?;
        let mut terms = Vec::new();
        for &(i, j) in g.edges() {
            match kind {
                HamiltonianKind::Ising => {
                    terms.push((1.0, PauliString::pair(n, i, Pauli::Z, j, Pauli::Z)?));
                }
                HamiltonianKind::Xy => {
                    terms.push((1.0, PauliString::pair(n, i, Pauli::X, j, Pauli::X)?));
                    terms.push((1.0, PauliString::pair(n, i, Pauli::Y, j, Pauli::Y)?));
                }
                HamiltonianKind::Xxz { j: coupling } => {
                    terms.push((1.0, PauliString::pair(n, i, Pauli::X, j, Pauli::X)?));
                    terms.push((1.0, PauliString::pair(n, i, Pauli::Y, j, Pauli::Y)?));
                    terms.push((coupling, PauliString::pair(n, i, Pauli::Z, j, Pauli::Z)?));
                }
            }
        }
        Ok(Self {
            kind,
            n_qubits: n,
            edges: g.edges().to_vec(),
            terms,
            diagonal: Diagonal::default(),
        })
    }

    pub fn kind(&self) -> HamiltonianKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `sum_{(i,j)} Z_i Z_j` on every basis state, computed on first use.
    pub fn ising_diagonal(&self) -> &[i32] {
        self.diagonal.0.get_or_init(|| ising_energies(self.n_qubits, &self.edges))
    }

    /// Upper bound on the spectral norm: sum of absolute term weights.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (c, p) in &self.terms {
            p.apply_into(psi, Complex64::new(*c, 0.0), out);
        }
    }
}

/// Diagonal of the Ising Hamiltonian: `E(x) = sum_{(i,j)} s_i s_j` with `s = 1 - 2 x_q`.
pub fn ising_energies(n_qubits: usize, edges: &[(usize, usize)]) -> Vec<i32> {
    let mut e = vec![edges.len() as i32; 1usize << n_qubits];
    for &(i, j) in edges {
        // edges whose endpoints differ contribute -1 instead of +1
        for (x, v) in e.iter_mut().enumerate() {
            *v -= 2 * (((x >> i) ^ (x >> j)) & 1) as i32;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, path};

    #[test]
    fn term_counts() {
        let g = cycle(4);
        assert_eq!(GraphHamiltonian::new(&g, HamiltonianKind::Ising).unwrap().terms().len(), 4);
        assert_eq!(GraphHamiltonian::new(&g, HamiltonianKind::Xy).unwrap().terms().len(), 8);
        let xxz = HamiltonianKind::xxz(0.5).unwrap();
        assert_eq!(GraphHamiltonian::new(&g, xxz).unwrap().terms().len(), 12);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("ising".parse::<HamiltonianKind>().unwrap(), HamiltonianKind::Ising);
        assert_eq!("XY".parse::<HamiltonianKind>().unwrap(), HamiltonianKind::Xy);
        assert_eq!(
            "xxz:0.25".parse::<HamiltonianKind>().unwrap(),
            HamiltonianKind::Xxz { j: 0.25 }
        );
        assert!("xxz:-1".parse::<HamiltonianKind>().is_err());
        assert!("potts".parse::<HamiltonianKind>().is_err());
        let k = HamiltonianKind::Xxz { j: 2.0 };
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<HamiltonianKind>(&json).unwrap(), k);
    }

    #[test]
    fn ising_diagonal_on_path() {
        let e = ising_energies(3, path(3).edges());
        assert_eq!(e[0b000], 2);
        assert_eq!(e[0b010], -2);
        assert_eq!(e[0b011], 0);
    }
}
