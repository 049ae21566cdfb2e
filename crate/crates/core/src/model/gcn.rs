//! Graph convolutional baseline with symmetric normalization.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{add_row_bias, column_sums, mean_pool, relu, relu_backward};
use super::params::{BlockId, ParamStore};
use super::Task;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub task: Task,
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}`.
pub fn normalized_adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.n_nodes();
    let a = g.adjacency_matrix() + DMatrix::identity(n, n);
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j])
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    config: GcnConfig,
    params: ParamStore,
    layers: Vec<(BlockId, BlockId)>,
    out_w: BlockId,
    out_b: BlockId,
}

impl GcnModel {
    pub fn new(config: GcnConfig, seed: u64) -> Result<Self> {
        let mut m = Self::zeroed(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for id in m.layers.iter().map(|l| l.0).chain([m.out_w]).collect::<Vec<_>>() {
            m.params.glorot(id, &mut rng);
        }
        Ok(m)
    }

    pub fn zeroed(config: GcnConfig) -> Result<Self> {
        if [config.input_dim, config.hidden, config.task.outputs()].contains(&0) {
            return Err(Error::InvalidArgument(format!("model dimensions must be positive: {config:?}")));
        }
        let mut p = ParamStore::new();
        let mut layers = Vec::new();
        let mut d = config.input_dim;
        for l in 0..config.layers {
            let w = p.push(format!("layer{l}.weight"), d, config.hidden);
            let b = p.push(format!("layer{l}.bias"), 1, config.hidden);
            layers.push((w, b));
            d = config.hidden;
        }
        let out_w = p.push("readout.weight", d, config.task.outputs());
        let out_b = p.push("readout.bias", 1, config.task.outputs());
        Ok(Self {
            config,
            params: p,
            layers,
            out_w,
            out_b,
        })
    }

    pub fn config(&self) -> &GcnConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Forward pass from features `x` and the normalized adjacency `a_hat`.
    pub fn forward(&self, x: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<(DMatrix<f64>, GcnTape)> {
        let n = x.nrows();
        if x.ncols() != self.config.input_dim || a_hat.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "features {:?} / adjacency {:?} do not fit a model with {} inputs",
                x.shape(),
                a_hat.shape(),
                self.config.input_dim
            )));
        }
        let mut hidden = vec![x.clone()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for &(w, b) in &self.layers {
            let mut z = a_hat * hidden.last().expect("input") * self.params.matrix(w);
            add_row_bias(&mut z, self.params.matrix(b));
            hidden.push(relu(&z));
            pre.push(z);
        }
        let last = hidden.last().expect("input");
        let pooled = self.config.task.is_graph_level().then(|| mean_pool(last));
        let mut y = pooled.as_ref().unwrap_or(last) * self.params.matrix(self.out_w);
        add_row_bias(&mut y, self.params.matrix(self.out_b));
        let tape = GcnTape {
            a_hat: a_hat.clone(),
            hidden,
            pre,
            pooled,
            consumed: false,
        };
        Ok((y, tape))
    }
}

#[derive(Debug, Clone)]
pub struct GcnTape {
    a_hat: DMatrix<f64>,
    hidden: Vec<DMatrix<f64>>,
    pre: Vec<DMatrix<f64>>,
    pooled: Option<DMatrix<f64>>,
    consumed: bool,
}

impl GcnTape {
    pub fn backward(&mut self, model: &GcnModel, grad_out: &DMatrix<f64>) -> Result<ParamStore> {
        if std::mem::replace(&mut self.consumed, true) {
            return Err(Error::InvalidArgument("gradient tape already consumed".into()));
        }
        let p = &model.params;
        let mut grads = p.zeros_like();
        let last = self.hidden.last().expect("input");
        let n = last.nrows();
        let readout_in = self.pooled.as_ref().unwrap_or(last);
        grads.accumulate(model.out_w, &(readout_in.transpose() * grad_out));
        grads.accumulate(model.out_b, &column_sums(grad_out));
        let d_in = grad_out * p.matrix(model.out_w).transpose();
        let mut dh = if self.pooled.is_some() {
            DMatrix::from_fn(n, d_in.ncols(), |_, j| d_in[(0, j)] / n as f64)
        } else {
            d_in
        };
        for (l, &(w, b)) in model.layers.iter().enumerate().rev() {
            let dz = relu_backward(&self.pre[l], &dh);
            let ah = &self.a_hat * &self.hidden[l];
            grads.accumulate(w, &(ah.transpose() * &dz));
            grads.accumulate(b, &column_sums(&dz));
            dh = self.a_hat.transpose() * (&dz * p.matrix(w).transpose());
        }
        Ok(grads)
    }
}
