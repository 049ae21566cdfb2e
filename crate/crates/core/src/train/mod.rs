//! Optimizer, losses, dataset splits and the training loop.
//!
//! Classical parameters (weights, biases, `gamma`) are updated on every
//! batch. Quantum parameters are updated once at the end of every epoch
//! `e` with `e % period == 0`; between updates the simulated correlations
//! are cached and reused.

pub mod adam;
pub mod loss;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attention::{gradient_cost, parameter_gradient, GradientStrategy};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{normalized_adjacency, GtqcConfig, GtqcModel, Model, ModelInput, Task};
use crate::quantum::{CorrelationTensor, GraphHamiltonian, QuantumParams};

pub use adam::Adam;
pub use loss::{argmax_rows, loss_and_grad, misclassification, LossKind, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Classical parameters every step, quantum parameters every `period` epochs.
    Full,
    /// Quantum parameters stay frozen.
    RandomFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Epochs between quantum parameter updates.
    pub period: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub mode: TrainMode,
    pub quantum_gradient: GradientStrategy,
    /// Learning rate of the quantum parameters; `lr` when unset.
    pub quantum_lr: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            weight_decay: 0.0,
            epochs: 500,
            batch_size: 32,
            period: 10,
            seed: 0,
            loss: LossKind::CrossEntropy,
            mode: TrainMode::Full,
            quantum_gradient: GradientStrategy::Auto,
            quantum_lr: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, task: Task) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.lr) || !self.quantum_lr.is_none_or(positive) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidArgument("weight decay must be non-negative".into()));
        }
        if self.batch_size == 0 || self.period == 0 {
            return Err(Error::InvalidArgument("batch size and period must be >= 1".into()));
        }
        let fits = match task {
            Task::GraphRegression(_) => self.loss != LossKind::CrossEntropy,
            _ => self.loss == LossKind::CrossEntropy,
        };
        if !fits {
            return Err(Error::InvalidArgument(format!("loss {:?} does not fit task {task:?}", self.loss)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    /// Misclassification ratio, or MAE for regression.
    pub train_metric: f64,
    pub val_metric: Option<f64>,
    /// State preparations for attention correlations during this epoch.
    pub sim_calls: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// Correlation simulations before the first epoch.
    pub warmup_sim_calls: usize,
    /// State preparations spent on quantum gradients.
    pub gradient_sim_calls: usize,
    pub quantum_updates: usize,
}

/// Aggregate metrics over a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub loss: f64,
    /// Misclassification ratio, or MAE for regression.
    pub error: f64,
    /// Regression only.
    pub mse: Option<f64>,
}

/// Seeded 0.8 / 0.1 / 0.1 split; validation and test sizes are rounded to
/// nearest and the remainder goes to training.
pub fn split_dataset(d: &Dataset, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let n = d.len();
    if n < 10 {
        return Err(Error::InvalidArgument(format!("cannot split {n} graphs, need at least 10")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = (0.1 * n as f64).round() as usize;
    let n_test = (0.1 * n as f64).round() as usize;
    let n_train = n - n_val - n_test;
    Ok((
        d.subset(&idx[..n_train]),
        d.subset(&idx[n_train..n_train + n_val]),
        d.subset(&idx[n_train + n_val..]),
    ))
}

/// Replaces every layer's heads by `n_heads` heads with quantum parameters
/// drawn once uniformly from `[0, 2π)` and frozen; row softmax is enabled
/// and all classical weights are re-initialized from `seed`.
pub fn random_feature_mode(model: &GtqcModel, n_heads: usize, seed: u64) -> Result<GtqcModel> {
    if n_heads == 0 {
        return Err(Error::InvalidArgument("random-feature mode needs at least one head".into()));
    }
    let config = GtqcConfig {
        heads: n_heads,
        softmax: true,
        ..model.config().clone()
    };
    let mut m = GtqcModel::new(config, seed)?;
    m.frozen_quantum = true;
    Ok(m)
}

fn target<'a>(d: &'a Dataset, i: usize) -> Result<Target<'a>> {
    let g = &d.graphs[i];
    let missing = || Error::Data(format!("graph {i} has no label for task {:?}", d.task));
    Ok(match d.task {
        Task::GraphClassification(_) => Target::Class(g.graph_label().ok_or_else(missing)?),
        Task::NodeClassification(_) => Target::NodeClasses(g.node_labels().ok_or_else(missing)?),
        Task::GraphRegression(_) => Target::Values(&d.targets.as_ref().ok_or_else(missing)?[i]),
    })
}

/// Per-split inputs with lazily simulated correlations.
struct Workspace<'a> {
    data: &'a Dataset,
    features: Vec<DMatrix<f64>>,
    a_hat: Vec<Option<DMatrix<f64>>>,
    corr: Vec<Option<Vec<CorrelationTensor>>>,
}

impl<'a> Workspace<'a> {
    fn new(model: &Model, data: &'a Dataset) -> Result<Self> {
        data.validate()?;
        if data.task != model.task() {
            return Err(Error::InvalidArgument(format!(
                "dataset task {:?} does not match model task {:?}",
                data.task,
                model.task()
            )));
        }
        let features: Vec<DMatrix<f64>> = data.graphs.iter().map(|g| g.features_or_uniform()).collect();
        if let Some(i) = features.iter().position(|x| x.ncols() != model.input_dim()) {
            return Err(Error::Data(format!(
                "graph {i} has {} features, model expects {}",
                features[i].ncols(),
                model.input_dim()
            )));
        }
        Ok(Self {
            data,
            features,
            a_hat: data
                .graphs
                .iter()
                .map(|g| model.needs_adjacency().then(|| normalized_adjacency(g)))
                .collect(),
            corr: vec![None; data.len()],
        })
    }

    /// Simulates every graph whose correlations are missing.
    fn fill(&mut self, model: &Model, sim_calls: &mut usize) -> Result<()> {
        for (g, slot) in self.data.graphs.iter().zip(&mut self.corr) {
            if slot.is_none() {
                *slot = Some(model.correlations(g)?);
                *sim_calls += model.n_heads();
            }
        }
        Ok(())
    }

    fn invalidate(&mut self) {
        self.corr.iter_mut().for_each(|c| *c = None);
    }

    fn input(&self, i: usize) -> ModelInput<'_> {
        ModelInput {
            features: &self.features[i],
            a_hat: self.a_hat[i].as_ref(),
            correlations: self.corr[i].as_deref().expect("correlations filled"),
        }
    }
}

#[derive(Default)]
struct Tally {
    loss: f64,
    graphs: usize,
    wrong: usize,
    units: usize,
    abs: f64,
    sq: f64,
}

impl Tally {
    fn add(&mut self, y: &DMatrix<f64>, t: Target<'_>, loss: f64) {
        self.loss += loss;
        self.graphs += 1;
        match t {
            Target::Class(c) => {
                self.wrong += (argmax_rows(y)[0] != c) as usize;
                self.units += 1;
            }
            Target::NodeClasses(cs) => {
                self.wrong += argmax_rows(y).iter().zip(cs).filter(|(p, c)| p != c).count();
                self.units += cs.len();
            }
            Target::Values(v) => {
                for (j, t) in v.iter().enumerate() {
                    self.abs += (y[(0, j)] - t).abs();
                    self.sq += (y[(0, j)] - t).powi(2);
                }
                self.units += v.len();
            }
        }
    }

    fn metrics(&self, task: Task) -> Metrics {
        let units = self.units.max(1) as f64;
        let loss = self.loss / self.graphs.max(1) as f64;
        if task.is_classification() {
            Metrics {
                loss,
                error: self.wrong as f64 / units,
                mse: None,
            }
        } else {
            Metrics {
                loss,
                error: self.abs / units,
                mse: Some(self.sq / units),
            }
        }
    }
}

fn measure(model: &Model, ws: &Workspace<'_>, loss: LossKind) -> Result<Metrics> {
    let mut tally = Tally::default();
    for i in 0..ws.data.len() {
        let (y, _) = model.forward(ws.input(i))?;
        let t = target(ws.data, i)?;
        let (l, _) = loss_and_grad(loss, &y, t)?;
        tally.add(&y, t, l);
    }
    Ok(tally.metrics(ws.data.task))
}

/// Loss and metrics of `model` on `data`; simulates the attention heads.
pub fn evaluate(model: &Model, data: &Dataset, loss: LossKind) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate an empty split".into()));
    }
    let mut ws = Workspace::new(model, data)?;
    ws.fill(model, &mut 0)?;
    measure(model, &ws, loss)
}

fn finite(x: f64, what: &str, epoch: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Numerical(format!("epoch {epoch}: {what} is {x}")))
    }
}

/// Trains `model` in place and returns the per-epoch history.
///
/// On a non-finite loss or gradient the model is restored to its state at the
/// start of the failing epoch and a numerical error is returned.
pub fn train(model: &mut Model, train_set: &Dataset, val_set: Option<&Dataset>, cfg: &TrainConfig) -> Result<History> {
    cfg.validate(model.task())?;
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut history = History::default();
    if cfg.epochs == 0 {
        return Ok(history);
    }
    let mut tr = Workspace::new(model, train_set)?;
    let mut va = val_set.filter(|v| !v.is_empty()).map(|v| Workspace::new(model, v)).transpose()?;
    tr.fill(model, &mut history.warmup_sim_calls)?;
    if let Some(v) = &mut va {
        v.fill(model, &mut history.warmup_sim_calls)?;
    }

    let mut adam = Adam::new(model.params().len());
    let mut q_adam: Option<Adam> = None;
    for epoch in 0..cfg.epochs {
        let checkpoint = model.clone();
        let result = run_epoch(model, &mut tr, va.as_mut(), cfg, epoch, &mut adam, &mut q_adam, &mut history);
        match result {
            Ok(record) => history.epochs.push(record),
            Err(e) => {
                *model = checkpoint;
                return Err(e);
            }
        }
    }
    Ok(history)
}

#[allow(clippy::too_many_arguments)]
fn run_epoch(
    model: &mut Model,
    tr: &mut Workspace<'_>,
    mut va: Option<&mut Workspace<'_>>,
    cfg: &TrainConfig,
    epoch: usize,
    adam: &mut Adam,
    q_adam: &mut Option<Adam>,
    history: &mut History,
) -> Result<EpochRecord> {
    let n = tr.data.len();
    let order: Vec<usize> = (0..n).collect();
    for batch in order.chunks(cfg.batch_size) {
        let mut grads = model.params().zeros_like();
        for &i in batch {
            let (y, mut tape) = model.forward(tr.input(i))?;
            let (l, dy) = loss_and_grad(cfg.loss, &y, target(tr.data, i)?)?;
            finite(l, "training loss", epoch)?;
            let g = tape.backward(model, &dy)?;
            grads.add_scaled(&g.params, 1.0 / batch.len() as f64);
        }
        adam.step(model.params_mut().values_mut(), grads.values(), cfg.lr, cfg.weight_decay)?;
    }

    let mut sim_calls = 0;
    let quantum_epoch = epoch % cfg.period == 0 && cfg.mode == TrainMode::Full;
    if let (true, Model::Gtqc(m)) = (quantum_epoch, &*model) {
        if !m.frozen_quantum {
            let grads = quantum_gradients(model, tr, cfg.loss, cfg.quantum_gradient, &mut history.gradient_sim_calls)?;
            let Model::Gtqc(m) = model else { unreachable!() };
            let mut flat: Vec<f64> = m.quantum().iter().flat_map(|q| q.values().iter().copied()).collect();
            let q_adam = q_adam.get_or_insert_with(|| Adam::new(flat.len()));
            q_adam.step(&mut flat, &grads, cfg.quantum_lr.unwrap_or(cfg.lr), 0.0)?;
            let len = m.config().depth * 2 + 1;
            let quantum = flat
                .chunks(len)
                .map(|c| QuantumParams::new(c.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            m.set_quantum(quantum)?;
            history.quantum_updates += 1;
            tr.invalidate();
            tr.fill(model, &mut sim_calls)?;
            if let Some(v) = va.as_deref_mut() {
                v.invalidate();
                v.fill(model, &mut sim_calls)?;
            }
        }
    }

    let train_m = measure(model, tr, cfg.loss)?;
    finite(train_m.loss, "training loss", epoch)?;
    let val_m = va.as_deref().map(|v| measure(model, v, cfg.loss)).transpose()?;
    if let Some(v) = &val_m {
        finite(v.loss, "validation loss", epoch)?;
    }
    Ok(EpochRecord {
        epoch,
        train_loss: train_m.loss,
        val_loss: val_m.map(|m| m.loss),
        train_metric: train_m.error,
        val_metric: val_m.map(|m| m.error),
        sim_calls,
    })
}

/// `dL/dθ` of the mean training loss, flattened head by head.
fn quantum_gradients(
    model: &Model,
    tr: &Workspace<'_>,
    loss: LossKind,
    strategy: GradientStrategy,
    sims: &mut usize,
) -> Result<Vec<f64>> {
    let Model::Gtqc(m) = model else {
        return Ok(Vec::new());
    };
    let n = tr.data.len() as f64;
    let mut out: Vec<Vec<f64>> = m.quantum().iter().map(|q| vec![0.0; q.len()]).collect();
    for (i, g) in tr.data.graphs.iter().enumerate() {
        let (y, mut tape) = model.forward(tr.input(i))?;
        let (_, dy) = loss_and_grad(loss, &y, target(tr.data, i)?)?;
        let d_corr = tape.backward(model, &(dy / n))?.correlations;
        let h = GraphHamiltonian::new(g, m.config().kind)?;
        for (head, qp) in m.quantum().iter().enumerate() {
            for k in 0..qp.len() {
                let dc = parameter_gradient(&h, qp, k, strategy)?;
                *sims += gradient_cost(&h, qp, k, strategy);
                out[head][k] += dot(d_corr[head].as_slice(), dc.as_slice());
            }
        }
    }
    Ok(out.concat())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, path, star};
    use crate::model::{GcnConfig, GcnModel};
    use crate::quantum::HamiltonianKind;

    fn toy() -> Dataset {
        let gs = (0..6)
            .map(|i| if i % 2 == 0 { path(4).with_graph_label(0) } else { star(4).with_graph_label(1) })
            .collect();
        Dataset::new("toy", Task::GraphClassification(2), gs, None).unwrap()
    }

    fn gtqc(heads: usize) -> Model {
        Model::Gtqc(
            GtqcModel::new(
                GtqcConfig {
                    input_dim: 1,
                    hidden: 4,
                    layers: 1,
                    heads,
                    head_dim: 3,
                    kind: HamiltonianKind::Ising,
                    depth: 1,
                    softmax: true,
                    task: Task::GraphClassification(2),
                },
                3,
            )
            .unwrap(),
        )
    }

    #[test]
    fn split_sizes() {
        let gs: Vec<_> = (0..25).map(|i| cycle(3 + i % 4).with_graph_label(i % 2)).collect();
        let d = Dataset::new("c", Task::GraphClassification(2), gs, None).unwrap();
        let (tr, va, te) = split_dataset(&d, 1).unwrap();
        // 2.5 rounds to 3
        assert_eq!((tr.len(), va.len(), te.len()), (19, 3, 3));
        let big = Dataset::new("c", Task::GraphClassification(2), (0..100).map(|i| path(2 + i % 5).with_graph_label(i % 2)).collect(), None).unwrap();
        let (a, b, c) = split_dataset(&big, 9).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (80, 10, 10));
        assert_eq!(split_dataset(&d, 1).unwrap().1, va);
        assert!(split_dataset(&d.subset(&[0, 1, 2]), 0).is_err());
    }

    #[test]
    fn zero_epochs_leave_the_model_alone() {
        let mut m = gtqc(1);
        let before = m.clone();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let h = train(&mut m, &toy(), None, &cfg).unwrap();
        assert!(h.epochs.is_empty());
        assert_eq!(m.params().values(), before.params().values());
    }

    #[test]
    fn simulation_accounting() {
        let d = toy();
        let mut m = gtqc(2);
        let cfg = TrainConfig { epochs: 3, period: 2, lr: 0.01, ..TrainConfig::default() };
        let h = train(&mut m, &d, Some(&d.subset(&[0, 1])), &cfg).unwrap();
        assert_eq!(h.warmup_sim_calls, 8 * 2);
        let calls: Vec<usize> = h.epochs.iter().map(|r| r.sim_calls).collect();
        assert_eq!(calls, vec![16, 0, 16]);
        assert_eq!(h.quantum_updates, 2);
        // mixing: 2·4+1 shifts each, Ising time on 3 edges: 7 shifts
        assert_eq!(h.gradient_sim_calls, 2 * 6 * 2 * (9 + 7 + 9));
    }

    #[test]
    fn frozen_heads_never_resimulate() {
        let Model::Gtqc(base) = gtqc(1) else { unreachable!() };
        let mut m = Model::Gtqc(random_feature_mode(&base, 3, 5).unwrap());
        assert_eq!(m.n_heads(), 3);
        let q0 = match &m {
            Model::Gtqc(g) => g.quantum().to_vec(),
            _ => unreachable!(),
        };
        let cfg = TrainConfig { epochs: 2, period: 1, ..TrainConfig::default() };
        let h = train(&mut m, &toy(), None, &cfg).unwrap();
        assert_eq!(h.quantum_updates, 0);
        assert!(h.epochs.iter().all(|r| r.sim_calls == 0));
        let Model::Gtqc(g) = &m else { unreachable!() };
        assert_eq!(g.quantum(), &q0[..]);
    }

    #[test]
    fn gcn_fits_path_versus_star() {
        let cfg = GcnConfig { input_dim: 1, hidden: 8, layers: 2, task: Task::GraphClassification(2) };
        let mut m = Model::Gcn(GcnModel::new(cfg, 0).unwrap());
        let d = toy();
        let before = evaluate(&m, &d, LossKind::CrossEntropy).unwrap();
        let tc = TrainConfig { epochs: 200, lr: 0.02, ..TrainConfig::default() };
        let h = train(&mut m, &d, None, &tc).unwrap();
        let after = evaluate(&m, &d, LossKind::CrossEntropy).unwrap();
        assert!(after.loss < before.loss);
        assert_eq!(after.error, 0.0);
        assert_eq!(h.epochs.last().unwrap().train_loss, after.loss);
    }

    #[test]
    fn quantum_step_lowers_the_loss() {
        let d = toy();
        let mut m = gtqc(1);
        let before = evaluate(&m, &d, LossKind::CrossEntropy).unwrap().loss;
        let cfg = TrainConfig { epochs: 30, period: 1, lr: 0.02, ..TrainConfig::default() };
        train(&mut m, &d, None, &cfg).unwrap();
        assert!(evaluate(&m, &d, LossKind::CrossEntropy).unwrap().loss < before);
    }

    #[test]
    fn mismatched_loss_is_rejected() {
        let mut m = gtqc(1);
        let cfg = TrainConfig { loss: LossKind::Mse, ..TrainConfig::default() };
        assert!(train(&mut m, &toy(), None, &cfg).is_err());
        assert!(evaluate(&m, &toy().subset(&[]), LossKind::CrossEntropy).is_err());
    }
}
