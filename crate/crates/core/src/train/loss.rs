//! Losses and metrics on one graph's output.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    CrossEntropy,
    Mae,
    Mse,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "cross-entropy" | "ce" => Ok(Self::CrossEntropy),
            "mae" | "l1" => Ok(Self::Mae),
            "mse" | "l2" => Ok(Self::Mse),
            other => Err(Error::InvalidArgument(format!("unknown loss {other:?}"))),
        }
    }
}

/// What one graph's output is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    /// One class for the single output row.
    Class(usize),
    /// One class per output row.
    NodeClasses(&'a [usize]),
    Values(&'a [f64]),
}

fn log_softmax_row(y: &DMatrix<f64>, r: usize) -> Vec<f64> {
    let row = y.row(r);
    let max = row.max();
    let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    row.iter().map(|x| x - lse).collect()
}

/// Loss of output `y` and its gradient `dL/dy`.
///
/// Node-level cross-entropy averages over nodes; regression losses average
/// over outputs.
pub fn loss_and_grad(kind: LossKind, y: &DMatrix<f64>, target: Target<'_>) -> Result<(f64, DMatrix<f64>)> {
    match (kind, target) {
        (LossKind::CrossEntropy, Target::Class(c)) => ce_rows(y, &[c]),
        (LossKind::CrossEntropy, Target::NodeClasses(cs)) => ce_rows(y, cs),
        (LossKind::Mae | LossKind::Mse, Target::Values(t)) => {
            if y.nrows() != 1 || y.ncols() != t.len() {
                return Err(Error::Shape(format!("output {:?} for {} targets", y.shape(), t.len())));
            }
            let m = t.len() as f64;
            let diff = DMatrix::from_fn(1, t.len(), |_, j| y[(0, j)] - t[j]);
            Ok(if kind == LossKind::Mse {
                (diff.norm_squared() / m, diff * (2.0 / m))
            } else {
                (diff.abs().sum() / m, diff.map(|d| d.signum() * (d != 0.0) as u8 as f64 / m))
            })
        }
        (k, _) => Err(Error::InvalidArgument(format!("loss {k:?} does not fit this target"))),
    }
}

fn ce_rows(y: &DMatrix<f64>, classes: &[usize]) -> Result<(f64, DMatrix<f64>)> {
    if y.nrows() != classes.len() {
        return Err(Error::Shape(format!("{} output rows for {} labels", y.nrows(), classes.len())));
    }
    if let Some(&c) = classes.iter().find(|&&c| c >= y.ncols()) {
        return Err(Error::Shape(format!("class {c} outside 0..{}", y.ncols())));
    }
    let n = classes.len() as f64;
    let mut grad = DMatrix::zeros(y.nrows(), y.ncols());
    let mut loss = 0.0;
    for (r, &c) in classes.iter().enumerate() {
        let lp = log_softmax_row(y, r);
        loss -= lp[c];
        for (j, l) in lp.iter().enumerate() {
            grad[(r, j)] = (l.exp() - (j == c) as u8 as f64) / n;
        }
    }
    Ok((loss / n, grad))
}

/// Index of the largest entry of each row; ties go to the lowest index.
pub fn argmax_rows(y: &DMatrix<f64>) -> Vec<usize> {
    y.row_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &x)| if x > best.1 { (j, x) } else { best })
                .0
        })
        .collect()
}

/// Fraction of mismatching entries.
pub fn misclassification(pred: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let wrong = pred.iter().zip(truth).filter(|(p, t)| p != t).count();
    wrong as f64 / truth.len() as f64
}
