//! The quantum-attention graph network.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{add_row_bias, column_sums, hconcat, mean_pool, relu, relu_backward};
use super::params::{BlockId, ParamStore};
use super::Task;
use crate::attention::{attention_backward, attention_from_correlations};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::{
    measure_correlations, prepare_with_hamiltonian, CorrelationTensor, GraphHamiltonian,
    HamiltonianKind, QuantumParams, N_COMPONENTS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtqcConfig {
    pub input_dim: usize,
    /// Width `d` of the encoder output.
    pub hidden: usize,
    pub layers: usize,
    pub heads: usize,
    pub head_dim: usize,
    pub kind: HamiltonianKind,
    /// Number `p` of graph/mixing layer pairs in every head's state.
    pub depth: usize,
    pub softmax: bool,
    pub task: Task,
}

impl GtqcConfig {
    fn validate(&self) -> Result<()> {
        let dims = [self.input_dim, self.hidden, self.layers, self.heads, self.head_dim];
        if dims.contains(&0) || self.task.outputs() == 0 {
            return Err(Error::InvalidArgument(format!("model dimensions must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Input width of layer `l`.
    pub fn layer_input(&self, l: usize) -> usize {
        if l == 0 {
            self.hidden
        } else {
            self.heads * self.head_dim
        }
    }

    pub fn total_heads(&self) -> usize {
        self.layers * self.heads
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtqcModel {
    config: GtqcConfig,
    params: ParamStore,
    /// Quantum parameters per head, layer-major.
    quantum: Vec<QuantumParams>,
    /// When set, quantum parameters are never differentiated or updated.
    pub frozen_quantum: bool,
    enc_w: BlockId,
    enc_b: BlockId,
    gammas: Vec<BlockId>,
    weights: Vec<BlockId>,
    out_w: BlockId,
    out_b: BlockId,
}

impl GtqcModel {
    /// Glorot-initialized weights and quantum parameters uniform in `[0, 2π)`.
    pub fn new(config: GtqcConfig, seed: u64) -> Result<Self> {
        let mut m = Self::zeroed(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for id in [m.enc_w]
            .into_iter()
            .chain(m.gammas.iter().zip(&m.weights).flat_map(|(&g, &w)| [g, w]))
            .chain([m.out_w])
        {
            m.params.glorot(id, &mut rng);
        }
        for qp in &mut m.quantum {
            for x in qp.values_mut() {
                *x = rng.random_range(0.0..TAU);
            }
        }
        Ok(m)
    }

    /// Model with every parameter zero.
    pub fn zeroed(config: GtqcConfig) -> Result<Self> {
        config.validate()?;
        let mut p = ParamStore::new();
        let enc_w = p.push("encoder.weight", config.input_dim, config.hidden);
        let enc_b = p.push("encoder.bias", 1, config.hidden);
        let mut gammas = Vec::new();
        let mut weights = Vec::new();
        for l in 0..config.layers {
            let d = config.layer_input(l);
            for h in 0..config.heads {
                gammas.push(p.push(format!("layer{l}.head{h}.gamma"), N_COMPONENTS, 1));
                weights.push(p.push(format!("layer{l}.head{h}.weight"), 2 * d, config.head_dim));
            }
        }
        let width = config.heads * config.head_dim;
        let out_w = p.push("readout.weight", width, config.task.outputs());
        let out_b = p.push("readout.bias", 1, config.task.outputs());
        let quantum = vec![QuantumParams::zeros(config.depth); config.total_heads()];
        Ok(Self {
            config,
            params: p,
            quantum,
            frozen_quantum: false,
            enc_w,
            enc_b,
            gammas,
            weights,
            out_w,
            out_b,
        })
    }

    pub fn config(&self) -> &GtqcConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn quantum(&self) -> &[QuantumParams] {
        &self.quantum
    }

    pub fn set_quantum(&mut self, quantum: Vec<QuantumParams>) -> Result<()> {
        if quantum.len() != self.config.total_heads()
            || quantum.iter().any(|q| q.depth() != self.config.depth)
        {
            return Err(Error::Shape(format!(
                "expected {} parameter vectors of depth {}",
                self.config.total_heads(),
                self.config.depth
            )));
        }
        self.quantum = quantum;
        Ok(())
    }

    pub fn gamma(&self, head: usize) -> [f64; N_COMPONENTS] {
        let mut g = [0.0; N_COMPONENTS];
        g.copy_from_slice(self.params.block(self.gammas[head]));
        g
    }

    pub fn gamma_block(&self, head: usize) -> BlockId {
        self.gammas[head]
    }

    pub fn readout_blocks(&self) -> (BlockId, BlockId) {
        (self.out_w, self.out_b)
    }

    /// Simulates every head on `g`; one state preparation per head.
    pub fn correlations(&self, g: &Graph) -> Result<Vec<CorrelationTensor>> {
        let h = GraphHamiltonian::new(g, self.config.kind)?;
        self.quantum
            .iter()
            .map(|qp| measure_correlations(&prepare_with_hamiltonian(&h, qp)?))
            .collect()
    }

    /// Forward pass from features `x` (`n × input_dim`) and one correlation
    /// tensor per head.
    pub fn forward(&self, x: &DMatrix<f64>, corr: &[CorrelationTensor]) -> Result<(DMatrix<f64>, GtqcTape)> {
        let c = &self.config;
        let n = x.nrows();
        if x.ncols() != c.input_dim {
            return Err(Error::Shape(format!(
                "features have {} columns, model expects {}",
                x.ncols(),
                c.input_dim
            )));
        }
        if corr.len() != c.total_heads() || corr.iter().any(|t| t.n_nodes() != n) {
            return Err(Error::Shape(format!(
                "need {} correlation tensors over {n} nodes",
                c.total_heads()
            )));
        }
        let mut h = x * self.params.matrix(self.enc_w);
        add_row_bias(&mut h, self.params.matrix(self.enc_b));
        let mut hidden = vec![h];
        let mut heads = Vec::with_capacity(c.total_heads());
        for l in 0..c.layers {
            let h = &hidden[l];
            let mut out = DMatrix::zeros(n, c.heads * c.head_dim);
            for k in 0..c.heads {
                let idx = l * c.heads + k;
                let a = attention_from_correlations(&corr[idx], &self.gamma(idx), c.softmax)?;
                let cat = hconcat(&(&a * h), h);
                let z = &cat * self.params.matrix(self.weights[idx]);
                out.columns_mut(k * c.head_dim, c.head_dim).copy_from(&relu(&z));
                heads.push(HeadRecord { a, cat, z });
            }
            hidden.push(out);
        }
        let last = hidden.last().expect("encoder output");
        let pooled = c.task.is_graph_level().then(|| mean_pool(last));
        let mut y = pooled.as_ref().unwrap_or(last) * self.params.matrix(self.out_w);
        add_row_bias(&mut y, self.params.matrix(self.out_b));
        let tape = GtqcTape {
            x: x.clone(),
            corr: corr.to_vec(),
            hidden,
            heads,
            pooled,
            consumed: false,
        };
        Ok((y, tape))
    }
}

#[derive(Debug, Clone)]
struct HeadRecord {
    a: DMatrix<f64>,
    cat: DMatrix<f64>,
    z: DMatrix<f64>,
}

/// Forward intermediates of one [`GtqcModel::forward`] call.
#[derive(Debug, Clone)]
pub struct GtqcTape {
    x: DMatrix<f64>,
    corr: Vec<CorrelationTensor>,
    hidden: Vec<DMatrix<f64>>,
    heads: Vec<HeadRecord>,
    pooled: Option<DMatrix<f64>>,
    consumed: bool,
}

impl GtqcTape {
    /// Reverse pass; returns parameter gradients and `dL/dC` per head.
    pub fn backward(
        &mut self,
        model: &GtqcModel,
        grad_out: &DMatrix<f64>,
    ) -> Result<(ParamStore, Vec<CorrelationTensor>)> {
        if std::mem::replace(&mut self.consumed, true) {
            return Err(Error::InvalidArgument("gradient tape already consumed".into()));
        }
        let c = &model.config;
        let p = &model.params;
        let mut grads = p.zeros_like();
        let n = self.x.nrows();
        let last = self.hidden.last().expect("encoder output");

        let readout_in = self.pooled.as_ref().unwrap_or(last);
        grads.accumulate(model.out_w, &(readout_in.transpose() * grad_out));
        grads.accumulate(model.out_b, &column_sums(grad_out));
        let d_in = grad_out * p.matrix(model.out_w).transpose();
        let mut dh = if self.pooled.is_some() {
            DMatrix::from_fn(n, d_in.ncols(), |_, j| d_in[(0, j)] / n as f64)
        } else {
            d_in
        };

        let mut d_corr = vec![CorrelationTensor::zeros(n); c.total_heads()];
        for l in (0..c.layers).rev() {
            let h = &self.hidden[l];
            let d = h.ncols();
            let mut dh_prev = DMatrix::zeros(n, d);
            for k in 0..c.heads {
                let idx = l * c.heads + k;
                let rec = &self.heads[idx];
                let dz = relu_backward(&rec.z, &dh.columns(k * c.head_dim, c.head_dim).into_owned());
                grads.accumulate(model.weights[idx], &(rec.cat.transpose() * &dz));
                let dcat = &dz * p.matrix(model.weights[idx]).transpose();
                let dm = dcat.columns(0, d);
                dh_prev += dcat.columns(d, d);
                dh_prev += rec.a.transpose() * dm;
                let da = dm * h.transpose();
                let ag = attention_backward(&self.corr[idx], &model.gamma(idx), c.softmax, &rec.a, &da);
                grads.accumulate(model.gammas[idx], &DMatrix::from_column_slice(N_COMPONENTS, 1, &ag.gamma));
                d_corr[idx] = ag.correlations;
            }
            dh = dh_prev;
        }
        grads.accumulate(model.enc_w, &(self.x.transpose() * &dh));
        grads.accumulate(model.enc_b, &column_sums(&dh));
        Ok((grads, d_corr))
    }
}
