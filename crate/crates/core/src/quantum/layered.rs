//! Alternating layered graph states: a mixing layer followed by `p`
//! (graph evolution, mixing) pairs, starting from `|0...0>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::evolve::{evolve_graph, evolve_mixing_in_place};
use crate::quantum::hamiltonian::{GraphHamiltonian, HamiltonianKind};
use crate::quantum::state::{check_size, StateVector};

/// Parameter vector `(theta_0, t_1, theta_1, ..., t_p, theta_p)`.
///
/// Even positions are mixing angles, odd positions are graph-evolution times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantumParams(Vec<f64>);

/// Role of one entry of a [`QuantumParams`] vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamRole {
    Mixing,
    Time,
}

impl QuantumParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "quantum parameter vector must have odd length, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite quantum parameter {v}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(depth: usize) -> Self {
        Self(vec![0.0; 2 * depth + 1])
    }

    pub fn depth(&self) -> usize {
        self.0.len() / 2
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn role(&self, index: usize) -> ParamRole {
        if index % 2 == 0 {
            ParamRole::Mixing
        } else {
            ParamRole::Time
        }
    }

    /// Copy with entry `index` shifted by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut v = self.0.clone();
        v[index] += delta;
        Self(v)
    }
}

impl TryFrom<Vec<f64>> for QuantumParams {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantumParams> for Vec<f64> {
    fn from(p: QuantumParams) -> Self {
        p.0
    }
}

/// Prepares the layered state for graph `g`.
pub fn prepare_graph_state(g: &Graph, kind: HamiltonianKind, qp: &QuantumParams) -> Result<StateVector> {
    check_size(g.n_nodes())?;
    let h = GraphHamiltonian::new(g, kind)?;
    prepare_with_hamiltonian(&h, qp)
}

/// Same as [`prepare_graph_state`] with a prebuilt Hamiltonian.
pub fn prepare_with_hamiltonian(h: &GraphHamiltonian, qp: &QuantumParams) -> Result<StateVector> {
    let mut s = StateVector::zero(h.n_qubits())?;
    let v = qp.values();
    evolve_mixing_in_place(&mut s, v[0]);
    for layer in v[1..].chunks_exact(2) {
        s = evolve_graph(&s, h, layer[0])?;
        evolve_mixing_in_place(&mut s, layer[1]);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn parameter_vector_must_be_odd() {
        assert!(QuantumParams::new(vec![0.0, 1.0]).is_err());
        assert!(QuantumParams::new(vec![0.0, f64::NAN, 1.0]).is_err());
        let qp = QuantumParams::new(vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(qp.depth(), 2);
        assert_eq!(qp.role(0), ParamRole::Mixing);
        assert_eq!(qp.role(3), ParamRole::Time);
        assert!(serde_json::from_str::<QuantumParams>("[1.0, 2.0]").is_err());
    }

    #[test]
    fn all_zero_parameters_give_zero_state() {
        let s = prepare_graph_state(&path(4), HamiltonianKind::Xy, &QuantumParams::zeros(2)).unwrap();
        assert_eq!(s, StateVector::zero(4).unwrap());
    }

    #[test]
    fn depth_zero_half_pi_excites_all() {
        let qp = QuantumParams::new(vec![FRAC_PI_2]).unwrap();
        let s = prepare_graph_state(&path(3), HamiltonianKind::Ising, &qp).unwrap();
        assert!((s.probability(0b111) - 1.0).abs() < 1e-15);
        assert!((s.amplitudes()[0b111] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn size_cap_is_enforced() {
        let g = path(25);
        let err = prepare_graph_state(&g, HamiltonianKind::Ising, &QuantumParams::zeros(0));
        assert!(matches!(err, Err(Error::TooManyQubits { .. })));
    }
}
