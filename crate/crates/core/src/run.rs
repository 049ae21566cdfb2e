//! Config-file driven training runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_json_graphs, parse_tudataset, Dataset, TargetScaler};
use crate::error::{Error, Result};
use crate::model::{GcnConfig, GcnModel, GtqcConfig, GtqcModel, Model};
use crate::quantum::HamiltonianKind;
use crate::spectral::laplacian_eigenmaps;
use crate::train::{evaluate, random_feature_mode, split_dataset, train, History, Metrics, TrainConfig, TrainMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataFormat {
    Json,
    Tudataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Gtqc {
        hidden: usize,
        layers: usize,
        #[serde(default = "one")]
        heads: usize,
        head_dim: usize,
        #[serde(default = "ising")]
        kind: HamiltonianKind,
        #[serde(default = "one")]
        depth: usize,
        #[serde(default)]
        softmax: bool,
        /// Frozen random heads per layer; switches on random-feature training.
        #[serde(default)]
        random_heads: Option<usize>,
    },
    Gcn {
        hidden: usize,
        layers: usize,
    },
}

fn one() -> usize {
    1
}

fn ising() -> HamiltonianKind {
    HamiltonianKind::Ising
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Relative paths resolve against the config file's directory.
    pub dataset: PathBuf,
    /// Inferred from the path when absent: directories are TUDataset.
    #[serde(default)]
    pub format: Option<DataFormat>,
    pub model: ModelSpec,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub max_nodes: Option<usize>,
    /// Replace node features by this many Laplacian eigenmaps.
    #[serde(default)]
    pub le_features: Option<usize>,
    /// Train/val/test split; defaults to splitting when there are at least 10 graphs.
    #[serde(default)]
    pub split: Option<bool>,
    /// Standardize regression targets with training-set statistics.
    #[serde(default)]
    pub standardize_targets: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if cfg.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.dataset = dir.join(&cfg.dataset);
            }
        }
        Ok(cfg)
    }
}

/// Reads a dataset in either supported format.
pub fn load_dataset(path: &Path, format: Option<DataFormat>) -> Result<Dataset> {
    let format = format.unwrap_or(if path.is_dir() { DataFormat::Tudataset } else { DataFormat::Json });
    match format {
        DataFormat::Json => load_json_graphs(path),
        DataFormat::Tudataset => Ok(parse_tudataset(path)?.dataset),
    }
}

pub fn build_model(spec: &ModelSpec, data: &Dataset, seed: u64) -> Result<Model> {
    let input_dim = data.feature_dim()?;
    Ok(match *spec {
        ModelSpec::Gtqc {
            hidden,
            layers,
            heads,
            head_dim,
            kind,
            depth,
            softmax,
            random_heads,
        } => {
            let m = GtqcModel::new(
                GtqcConfig {
                    input_dim,
                    hidden,
                    layers,
                    heads,
                    head_dim,
                    kind,
                    depth,
                    softmax,
                    task: data.task,
                },
                seed,
            )?;
            match random_heads {
                Some(n) => Model::Gtqc(random_feature_mode(&m, n, seed)?),
                None => Model::Gtqc(m),
            }
        }
        ModelSpec::Gcn { hidden, layers } => Model::Gcn(GcnModel::new(
            GcnConfig {
                input_dim,
                hidden,
                layers,
                task: data.task,
            },
            seed,
        )?),
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub model: Model,
    pub history: History,
    pub train: Metrics,
    pub val: Option<Metrics>,
    pub test: Option<Metrics>,
    /// Graphs dropped by the node cap.
    pub removed: usize,
}

/// Loads the data, builds the model and trains it. `seed` overrides the
/// config's training seed and drives initialization and the split.
pub fn execute(cfg: &RunConfig, seed: Option<u64>) -> Result<RunOutcome> {
    let mut tc = cfg.train.clone();
    if let Some(s) = seed {
        tc.seed = s;
    }
    if matches!(cfg.model, ModelSpec::Gtqc { random_heads: Some(_), .. }) {
        tc.mode = TrainMode::RandomFeatures;
    }
    let mut data = load_dataset(&cfg.dataset, cfg.format)?;
    let removed = cfg.max_nodes.map_or(0, |cap| data.filter_max_nodes(cap));
    if data.is_empty() {
        return Err(Error::Data("no graphs left after filtering".into()));
    }
    if let Some(k) = cfg.le_features {
        data.map_features(|g| Ok(laplacian_eigenmaps(g, k)?.vectors))?;
    }
    let split = cfg.split.unwrap_or(data.len() >= 10);
    let (mut tr, mut va, mut te) = if split {
        let (a, b, c) = split_dataset(&data, tc.seed)?;
        (a, Some(b), Some(c))
    } else {
        (data, None, None)
    };
    if cfg.standardize_targets {
        if let Some(t) = &tr.targets {
            let scaler = TargetScaler::fit(t)?;
            for d in std::iter::once(&mut tr).chain(va.iter_mut()).chain(te.iter_mut()) {
                scaler.apply(d);
            }
        }
    }
    let mut model = build_model(&cfg.model, &tr, tc.seed)?;
    let history = train(&mut model, &tr, va.as_ref(), &tc)?;
    let eval = |d: &Option<Dataset>| d.as_ref().filter(|d| !d.is_empty()).map(|d| evaluate(&model, d, tc.loss)).transpose();
    Ok(RunOutcome {
        train: evaluate(&model, &tr, tc.loss)?,
        val: eval(&va)?,
        test: eval(&te)?,
        model,
        history,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::save_json_graphs;
    use crate::graph::{cycle, path};

    #[test]
    fn config_round_trip_and_run() {
        let dir = tempfile::tempdir().unwrap();
        let graphs: Vec<_> = (0..4).map(|i| if i % 2 == 0 { path(4) } else { cycle(4) }.with_graph_label(i % 2)).collect();
        save_json_graphs(&dir.path().join("d.json"), &graphs, None).unwrap();
        let text = r#"{"dataset": "d.json", "model": {"type": "gtqc", "hidden": 4, "layers": 1, "head_dim": 3},
                       "train": {"epochs": 2, "period": 1, "lr": 0.01}}"#;
        std::fs::write(dir.path().join("run.json"), text).unwrap();
        let cfg = RunConfig::from_file(&dir.path().join("run.json")).unwrap();
        assert_eq!(cfg.dataset, dir.path().join("d.json"));
        let out = execute(&cfg, Some(3)).unwrap();
        assert_eq!(out.history.epochs.len(), 2);
        assert!(out.val.is_none());
        let again = execute(&cfg, Some(3)).unwrap();
        assert_eq!(out.model.params().values(), again.model.params().values());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("r.json"), r#"{"dataset": "x", "model": {"type": "gcn", "hidden": 2, "layers": 1}, "lr": 1}"#).unwrap();
        assert!(matches!(RunConfig::from_file(&dir.path().join("r.json")), Err(Error::Json { .. })));
    }
}
