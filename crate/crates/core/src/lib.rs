//! Graph neural networks whose attention matrices come from two-body
//! correlations of an exactly simulated quantum system sharing the graph's
//! topology.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`], [`lattice`], [`lift`], [`wl`], [`spectral`]: graphs, generators,
//!   color refinement and positional features.
//! - [`quantum`]: matrix-free statevector simulation of Ising / XY / XXZ graph
//!   Hamiltonians, layered state preparation and correlation measurement.
//! - [`attention`]: attention matrices from correlations and their gradients
//!   with respect to the quantum parameters.
//! - [`model`]: the attention network, a GCN baseline and reverse-mode gradients.
//! - [`train`]: optimizer, losses, splits and the training loop.
//! - [`data`]: dataset ingestion and results export.
//! - [`run`]: config-file driven training.
//! - [`experiments`]: the named reproduction runs used by the CLI.

pub mod attention;
pub mod data;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod lattice;
pub mod lift;
pub mod model;
pub mod quantum;
pub mod run;
pub mod spectral;
pub mod train;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{permute_graph, Graph};
pub use lattice::{lattice_graph, LatticeKind, LatticeSpec};
pub use lift::{graph_covers, random_lift, CoversSpec, LiftSpec};
pub use spectral::laplacian_eigenmaps;
pub use wl::{are_isomorphic, wl_indistinguishable};
