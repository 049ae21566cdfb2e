//! Run manifests and CSV export of training histories.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
pub use crate::train::{EpochRecord, History};

/// Identity of a run: everything that determines its outputs, hashed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    /// SHA-256 of the canonical config JSON and the seed.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(name: impl Into<String>, config: &impl Serialize, seed: u64) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::Json {
            path: "config".into(),
            message: e.to_string(),
        })?;
        let mut hasher = Sha256::new();
        hasher.update(config.to_string().as_bytes());
        hasher.update(seed.to_le_bytes());
        Ok(Self {
            name: name.into(),
            config_hash: hex::encode(hasher.finalize()),
            seed,
            version: format!("v{}", env!("CARGO_PKG_VERSION")),
            config,
            outputs: Vec::new(),
            wall_seconds: None,
        })
    }

    /// Short hash used in output file names.
    pub fn tag(&self) -> &str {
        &self.config_hash[..12]
    }

    fn file(&self, dir: &Path, kind: &str, ext: &str) -> PathBuf {
        dir.join(format!("{}-{}.{kind}.{ext}", self.name, self.tag()))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `<name>-<tag>.history.csv`, `.losses.csv` and `.manifest.json`
/// into `out_dir` and returns their paths.
///
/// Refuses histories that are empty or contain a non-finite loss.
pub fn export_results(history: &History, manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if history.epochs.is_empty() {
        return Err(Error::InvalidArgument("nothing to export: empty history".into()));
    }
    if let Some(r) = history.epochs.iter().find(|r| {
        !r.train_loss.is_finite() || r.val_loss.is_some_and(|v| !v.is_finite())
    }) {
        return Err(Error::Numerical(format!("epoch {} has a non-finite loss", r.epoch)));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let hist = manifest.file(out_dir, "history", "csv");
    write_csv(
        &hist,
        &["epoch", "train_loss", "val_loss", "train_metric", "val_metric", "sim_calls"],
        history.epochs.iter().map(|r| {
            vec![
                r.epoch.to_string(),
                r.train_loss.to_string(),
                opt(r.val_loss),
                r.train_metric.to_string(),
                opt(r.val_metric),
                r.sim_calls.to_string(),
            ]
        }),
    )?;
    let losses = manifest.file(out_dir, "losses", "csv");
    write_csv(
        &losses,
        &["epoch", "split", "loss"],
        history.epochs.iter().flat_map(|r| {
            let mut rows = vec![vec![r.epoch.to_string(), "train".into(), r.train_loss.to_string()]];
            if let Some(v) = r.val_loss {
                rows.push(vec![r.epoch.to_string(), "val".into(), v.to_string()]);
            }
            rows
        }),
    )?;

    let man = manifest.file(out_dir, "manifest", "json");
    let mut m = manifest.clone();
    m.outputs = [&hist, &losses]
        .iter()
        .map(|p| p.file_name().expect("file").to_string_lossy().into_owned())
        .collect();
    let text = serde_json::to_string_pretty(&m).expect("manifest is serializable");
    std::fs::write(&man, text + "\n").map_err(|e| Error::io(&man, e))?;
    Ok(vec![hist, losses, man])
}
