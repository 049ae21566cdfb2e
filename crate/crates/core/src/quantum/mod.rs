//! Exact statevector simulation of graph Hamiltonians.

pub mod correlations;
pub mod evolve;
pub mod ground;
pub mod hamiltonian;
pub mod layered;
pub mod pauli;
pub mod state;

pub use correlations::{measure_correlations, CorrelationTensor, COMPONENTS, N_COMPONENTS};
pub use evolve::{evolve_graph, evolve_mixing, LanczosConfig};
pub use ground::{hardcore_walk_graph, ising_ground_states, GroundStates};
pub use hamiltonian::{GraphHamiltonian, HamiltonianKind};
pub use layered::{prepare_graph_state, prepare_with_hamiltonian, ParamRole, QuantumParams};
pub use pauli::{apply_pauli_string, expectation, Pauli, PauliString};
pub use state::{bitstring, sample_counts, StateVector, MAX_QUBITS};
