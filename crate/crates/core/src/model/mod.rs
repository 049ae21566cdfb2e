//! The quantum-attention network, the GCN baseline, reverse-mode gradients
//! and checkpoints.

pub mod gcn;
pub mod gtqc;
pub mod layers;
pub mod params;

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::{CorrelationTensor, QuantumParams};

pub use gcn::{normalized_adjacency, GcnConfig, GcnModel, GcnTape};
pub use gtqc::{GtqcConfig, GtqcModel, GtqcTape};
pub use layers::{layer_forward, multi_head_forward};
pub use params::{BlockId, BlockRecord, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// One label out of `k` per graph.
    GraphClassification(usize),
    /// `m` real targets per graph.
    GraphRegression(usize),
    /// One label out of `k` per node.
    NodeClassification(usize),
}

impl Task {
    pub fn outputs(&self) -> usize {
        match *self {
            Task::GraphClassification(k) | Task::GraphRegression(k) | Task::NodeClassification(k) => k,
        }
    }

    pub fn is_graph_level(&self) -> bool {
        !matches!(self, Task::NodeClassification(_))
    }

    pub fn is_classification(&self) -> bool {
        !matches!(self, Task::GraphRegression(_))
    }
}

/// Everything a forward pass needs besides the parameters.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    pub features: &'a DMatrix<f64>,
    /// Normalized adjacency; required by the GCN, ignored otherwise.
    pub a_hat: Option<&'a DMatrix<f64>>,
    /// One tensor per attention head; empty for the GCN.
    pub correlations: &'a [CorrelationTensor],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Gtqc(GtqcModel),
    Gcn(GcnModel),
}

/// Gradients of one backward pass.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub params: ParamStore,
    /// `dL/dC` per attention head; empty for the GCN.
    pub correlations: Vec<CorrelationTensor>,
}

#[derive(Debug, Clone)]
pub enum Tape {
    Gtqc(GtqcTape),
    Gcn(GcnTape),
}

impl Tape {
    /// Reverse pass for `dL/dy = grad_out`. A tape can be used once.
    pub fn backward(&mut self, model: &Model, grad_out: &DMatrix<f64>) -> Result<Gradients> {
        match (self, model) {
            (Tape::Gtqc(t), Model::Gtqc(m)) => {
                let (params, correlations) = t.backward(m, grad_out)?;
                Ok(Gradients { params, correlations })
            }
            (Tape::Gcn(t), Model::Gcn(m)) => Ok(Gradients {
                params: t.backward(m, grad_out)?,
                correlations: Vec::new(),
            }),
            _ => Err(Error::InvalidArgument("tape was recorded by a different model".into())),
        }
    }
}

impl Model {
    pub fn task(&self) -> Task {
        match self {
            Model::Gtqc(m) => m.config().task,
            Model::Gcn(m) => m.config().task,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Model::Gtqc(m) => m.config().input_dim,
            Model::Gcn(m) => m.config().input_dim,
        }
    }

    pub fn params(&self) -> &ParamStore {
        match self {
            Model::Gtqc(m) => m.params(),
            Model::Gcn(m) => m.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        match self {
            Model::Gtqc(m) => m.params_mut(),
            Model::Gcn(m) => m.params_mut(),
        }
    }

    /// Total number of attention heads over all layers.
    pub fn n_heads(&self) -> usize {
        match self {
            Model::Gtqc(m) => m.config().total_heads(),
            Model::Gcn(_) => 0,
        }
    }

    pub fn needs_adjacency(&self) -> bool {
        matches!(self, Model::Gcn(_))
    }

    /// Simulated correlations of every head on `g` (empty for the GCN).
    pub fn correlations(&self, g: &Graph) -> Result<Vec<CorrelationTensor>> {
        match self {
            Model::Gtqc(m) => m.correlations(g),
            Model::Gcn(_) => Ok(Vec::new()),
        }
    }

    pub fn forward(&self, input: ModelInput<'_>) -> Result<(DMatrix<f64>, Tape)> {
        match self {
            Model::Gtqc(m) => {
                let (y, t) = m.forward(input.features, input.correlations)?;
                Ok((y, Tape::Gtqc(t)))
            }
            Model::Gcn(m) => {
                let a_hat = input
                    .a_hat
                    .ok_or_else(|| Error::InvalidArgument("GCN forward needs the adjacency".into()))?;
                let (y, t) = m.forward(input.features, a_hat)?;
                Ok((y, Tape::Gcn(t)))
            }
        }
    }

    /// Convenience forward on a graph, simulating the heads as needed.
    pub fn predict(&self, g: &Graph) -> Result<DMatrix<f64>> {
        let x = g.features_or_uniform();
        let corr = self.correlations(g)?;
        let a_hat = self.needs_adjacency().then(|| normalized_adjacency(g));
        let input = ModelInput {
            features: &x,
            a_hat: a_hat.as_ref(),
            correlations: &corr,
        };
        Ok(self.forward(input)?.0)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let architecture = match self {
            Model::Gtqc(m) => Architecture::Gtqc {
                config: m.config().clone(),
                quantum: m.quantum().to_vec(),
                frozen_quantum: m.frozen_quantum,
            },
            Model::Gcn(m) => Architecture::Gcn {
                config: m.config().clone(),
            },
        };
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            architecture,
            tensors: self.params().to_records(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.format_version != CHECKPOINT_VERSION {
            return Err(Error::Data(format!(
                "checkpoint format {} is not supported (expected {CHECKPOINT_VERSION})",
                ck.format_version
            )));
        }
        let mut model = match &ck.architecture {
            Architecture::Gtqc {
                config,
                quantum,
                frozen_quantum,
            } => {
                let mut m = GtqcModel::zeroed(config.clone())?;
                m.set_quantum(quantum.clone())?;
                m.frozen_quantum = *frozen_quantum;
                Model::Gtqc(m)
            }
            Architecture::Gcn { config } => Model::Gcn(GcnModel::zeroed(config.clone())?),
        };
        model.params_mut().load_records(&ck.tensors)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_checkpoint()).map_err(|e| Error::Json {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_checkpoint(&ck)
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub architecture: Architecture,
    pub tensors: Vec<BlockRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Architecture {
    Gtqc {
        config: GtqcConfig,
        quantum: Vec<QuantumParams>,
        frozen_quantum: bool,
    },
    Gcn {
        config: GcnConfig,
    },
}
