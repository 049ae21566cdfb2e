//! Datasets: labeled graph collections, their on-disk formats and results export.

pub mod export;
pub mod json;
pub mod tudataset;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::Task;

pub use export::{export_results, RunManifest};
pub use json::{graphs_to_json, load_graphs, load_json_graphs, parse_graphs, save_json_graphs};
pub use tudataset::{parse_tudataset, write_tudataset, TuDataset};

/// Labeled graphs for one task.
///
/// Graph-classification labels live in [`Graph::graph_label`], node labels in
/// [`Graph::node_labels`] and regression targets in `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub task: Task,
    pub graphs: Vec<Graph>,
    pub targets: Option<Vec<Vec<f64>>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        task: Task,
        graphs: Vec<Graph>,
        targets: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let d = Self {
            name: name.into(),
            task,
            graphs,
            targets,
        };
        d.validate()?;
        Ok(d)
    }

    /// Infers the task from the labels present on every graph: regression
    /// targets first, then graph labels, then node labels.
    pub fn infer(name: impl Into<String>, graphs: Vec<Graph>, targets: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let task = if let Some(t) = &targets {
            Task::GraphRegression(t.first().map_or(0, Vec::len))
        } else if !graphs.is_empty() && graphs.iter().all(|g| g.graph_label().is_some()) {
            Task::GraphClassification(graphs.iter().filter_map(Graph::graph_label).max().unwrap_or(0) + 1)
        } else if !graphs.is_empty() && graphs.iter().all(|g| g.node_labels().is_some()) {
            let max = graphs
                .iter()
                .flat_map(|g| g.node_labels().unwrap_or(&[]).iter().copied())
                .max()
                .unwrap_or(0);
            Task::NodeClassification(max + 1)
        } else {
            return Err(Error::Data(
                "cannot infer a task: graphs carry neither targets, graph labels nor node labels".into(),
            ));
        };
        Self::new(name, task, graphs, targets)
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.task.outputs();
        if k == 0 {
            return Err(Error::Data(format!("task {:?} has no outputs", self.task)));
        }
        for (i, g) in self.graphs.iter().enumerate() {
            match self.task {
                Task::GraphClassification(_) => match g.graph_label() {
                    Some(l) if l < k => {}
                    other => {
                        return Err(Error::Data(format!("graph {i}: label {other:?} outside 0..{k}")));
                    }
                },
                Task::NodeClassification(_) => match g.node_labels() {
                    Some(ls) if ls.iter().all(|&l| l < k) => {}
                    _ => return Err(Error::Data(format!("graph {i}: node labels missing or outside 0..{k}"))),
                },
                Task::GraphRegression(_) => {}
            }
        }
        if let Task::GraphRegression(m) = self.task {
            let t = self
                .targets
                .as_ref()
                .ok_or_else(|| Error::Data("regression dataset without targets".into()))?;
            if t.len() != self.graphs.len() {
                return Err(Error::Data(format!("{} targets for {} graphs", t.len(), self.graphs.len())));
            }
            if let Some(i) = t.iter().position(|v| v.len() != m || v.iter().any(|x| !x.is_finite())) {
                return Err(Error::Data(format!("graph {i}: expected {m} finite targets")));
            }
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            task: self.task,
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            targets: self
                .targets
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i].clone()).collect()),
        }
    }

    /// Drops graphs with more than `cap` nodes; returns the number removed.
    pub fn filter_max_nodes(&mut self, cap: usize) -> usize {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.graphs[i].n_nodes() <= cap).collect();
        let removed = self.len() - keep.len();
        *self = self.subset(&keep);
        removed
    }

    /// Replaces every graph's features.
    pub fn map_features(&mut self, f: impl Fn(&Graph) -> Result<nalgebra::DMatrix<f64>>) -> Result<()> {
        for g in &mut self.graphs {
            let x = f(g)?;
            *g = g.clone().with_features(x)?;
        }
        Ok(())
    }

    /// Feature width shared by every graph (1 for featureless graphs).
    pub fn feature_dim(&self) -> Result<usize> {
        let dims: Vec<usize> = self
            .graphs
            .iter()
            .map(|g| g.features().map_or(1, |f| f.ncols()))
            .collect();
        match dims.first() {
            Some(&d) if dims.iter().all(|&x| x == d) => Ok(d),
            Some(_) => Err(Error::Data("graphs have different feature widths".into())),
            None => Err(Error::Data("empty dataset".into())),
        }
    }
}

/// Affine map applied to regression targets: `(y - mean) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl TargetScaler {
    /// Fits per-output mean and standard deviation (1 where the variance vanishes).
    pub fn fit(targets: &[Vec<f64>]) -> Result<Self> {
        let m = targets.first().map(Vec::len).ok_or_else(|| Error::Data("no targets".into()))?;
        let n = targets.len() as f64;
        let mean: Vec<f64> = (0..m).map(|j| targets.iter().map(|t| t[j]).sum::<f64>() / n).collect();
        let scale = (0..m)
            .map(|j| {
                let var = targets.iter().map(|t| (t[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn apply(&self, d: &mut Dataset) {
        if let Some(t) = &mut d.targets {
            for row in t {
                for (j, y) in row.iter_mut().enumerate() {
                    *y = (*y - self.mean[j]) / self.scale[j];
                }
            }
        }
    }
}
