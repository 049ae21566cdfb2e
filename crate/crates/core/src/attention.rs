//! Attention matrices from correlation tensors, and derivatives of the
//! correlations with respect to the quantum parameters.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::quantum::{
    measure_correlations, prepare_with_hamiltonian, CorrelationTensor, GraphHamiltonian,
    HamiltonianKind, ParamRole, QuantumParams, N_COMPONENTS,
};

/// Central difference step.
pub const FD_STEP: f64 = 1e-5;

/// Interpolation systems with a worse condition number fall back to finite differences.
const MAX_CONDITION: f64 = 1e8;

/// One attention head: quantum parameters, mixing vector and normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionHead {
    pub params: QuantumParams,
    pub gamma: [f64; N_COMPONENTS],
    pub softmax: bool,
    pub kind: HamiltonianKind,
}

impl AttentionHead {
    pub fn correlations(&self, g: &Graph) -> Result<CorrelationTensor> {
        let h = GraphHamiltonian::new(g, self.kind)?;
        measure_correlations(&prepare_with_hamiltonian(&h, &self.params)?)
    }

    pub fn attention(&self, g: &Graph) -> Result<DMatrix<f64>> {
        attention_from_correlations(&self.correlations(g)?, &self.gamma, self.softmax)
    }
}

/// `A_ij = gamma · C_ij`, optionally softmax-normalized per row (diagonal included).
pub fn attention_from_correlations(
    c: &CorrelationTensor,
    gamma: &[f64],
    softmax: bool,
) -> Result<DMatrix<f64>> {
    if gamma.len() != N_COMPONENTS {
        return Err(Error::Shape(format!(
            "gamma has {} entries, expected {N_COMPONENTS}",
            gamma.len()
        )));
    }
    let n = c.n_nodes();
    let mut a = DMatrix::from_fn(n, n, |i, j| {
        c.get(i, j).iter().zip(gamma).map(|(x, y)| x * y).sum()
    });
    if softmax {
        softmax_rows(&mut a);
    }
    Ok(a)
}

pub fn softmax_rows(a: &mut DMatrix<f64>) {
    for mut row in a.row_iter_mut() {
        let max = row.max();
        row.apply(|x| *x = (*x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Gradients of a scalar loss with respect to `gamma` and `C`.
#[derive(Debug, Clone)]
pub struct AttentionGrads {
    pub gamma: [f64; N_COMPONENTS],
    pub correlations: CorrelationTensor,
}

/// Backpropagates `grad_a = dL/dA` through [`attention_from_correlations`].
///
/// `a` is the forward output (after softmax when enabled).
pub fn attention_backward(
    c: &CorrelationTensor,
    gamma: &[f64; N_COMPONENTS],
    softmax: bool,
    a: &DMatrix<f64>,
    grad_a: &DMatrix<f64>,
) -> AttentionGrads {
    let n = c.n_nodes();
    let mut g_lin = grad_a.clone();
    if softmax {
        for i in 0..n {
            let dot: f64 = (0..n).map(|k| grad_a[(i, k)] * a[(i, k)]).sum();
            for j in 0..n {
                g_lin[(i, j)] = a[(i, j)] * (grad_a[(i, j)] - dot);
            }
        }
    }
    let mut grad_gamma = [0.0; N_COMPONENTS];
    let mut grad_c = CorrelationTensor::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let gij = g_lin[(i, j)];
            for (k, (&cv, dc)) in c.get(i, j).iter().zip(grad_c.get_mut(i, j)).enumerate() {
                grad_gamma[k] += gij * cv;
                *dc = gij * gamma[k];
            }
        }
    }
    AttentionGrads {
        gamma: grad_gamma,
        correlations: grad_c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientStrategy {
    /// Trigonometric interpolation; errors on parameters it cannot handle.
    Trig,
    /// Central differences with step [`FD_STEP`].
    FiniteDiff,
    /// Trigonometric interpolation where supported, finite differences elsewhere.
    #[default]
    Auto,
}

impl std::str::FromStr for GradientStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "trig" => Ok(Self::Trig),
            "finite-diff" | "fd" => Ok(Self::FiniteDiff),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidArgument(format!("unknown gradient strategy {other:?}"))),
        }
    }
}

/// Number of harmonics `R` of the expectation as a function of parameter
/// `index`: frequencies are `0, 2, .., 2R`. `None` if not a finite trig polynomial.
pub fn harmonic_order(h: &GraphHamiltonian, qp: &QuantumParams, index: usize) -> Option<usize> {
    match qp.role(index) {
        ParamRole::Mixing => Some(h.n_qubits()),
        ParamRole::Time if h.kind() == HamiltonianKind::Ising => Some(h.edges().len()),
        ParamRole::Time => None,
    }
}

/// Number of state preparations [`parameter_gradient`] performs.
pub fn gradient_cost(h: &GraphHamiltonian, qp: &QuantumParams, index: usize, strategy: GradientStrategy) -> usize {
    match (strategy, harmonic_order(h, qp, index)) {
        (GradientStrategy::FiniteDiff, _) | (_, None) => 2,
        (_, Some(r)) => 2 * r + 1,
    }
}

/// `dC/dθ_k` for every quantum parameter, in parameter order.
///
/// Each call simulates the state `2R + 1` times per trig-differentiated
/// parameter and twice per finite-differenced one.
pub fn quantum_gradient(
    g: &Graph,
    kind: HamiltonianKind,
    qp: &QuantumParams,
    strategy: GradientStrategy,
) -> Result<Vec<CorrelationTensor>> {
    let h = GraphHamiltonian::new(g, kind)?;
    (0..qp.len())
        .map(|k| parameter_gradient(&h, qp, k, strategy))
        .collect()
}

/// `dC/dθ_index` for a single parameter.
pub fn parameter_gradient(
    h: &GraphHamiltonian,
    qp: &QuantumParams,
    index: usize,
    strategy: GradientStrategy,
) -> Result<CorrelationTensor> {
    if index >= qp.len() {
        return Err(Error::InvalidArgument(format!(
            "parameter {index} out of range for {} parameters",
            qp.len()
        )));
    }
    let order = harmonic_order(h, qp, index);
    match (strategy, order) {
        (GradientStrategy::FiniteDiff, _) | (GradientStrategy::Auto, None) => {
            finite_difference(h, qp, index)
        }
        (GradientStrategy::Trig, None) => Err(Error::Unsupported(format!(
            "trig gradient of a {} time parameter has no finite frequency set",
            h.kind()
        ))),
        (_, Some(r)) => match trig_weights(r) {
            Some(w) => {
                let step = PI / w.len() as f64;
                let samples = (0..w.len())
                    .map(|m| correlations_at(h, &qp.shifted(index, m as f64 * step)))
                    .collect::<Result<Vec<_>>>()?;
                let terms: Vec<(f64, &CorrelationTensor)> = w.iter().copied().zip(&samples).collect();
                Ok(CorrelationTensor::linear_combination(&terms))
            }
            None => {
                log::warn!("trig interpolation of order {r} is ill-conditioned, using finite differences");
                finite_difference(h, qp, index)
            }
        },
    }
}

fn correlations_at(h: &GraphHamiltonian, qp: &QuantumParams) -> Result<CorrelationTensor> {
    measure_correlations(&prepare_with_hamiltonian(h, qp)?)
}

fn finite_difference(h: &GraphHamiltonian, qp: &QuantumParams, index: usize) -> Result<CorrelationTensor> {
    let plus = correlations_at(h, &qp.shifted(index, FD_STEP))?;
    let minus = correlations_at(h, &qp.shifted(index, -FD_STEP))?;
    let w = 0.5 / FD_STEP;
    Ok(CorrelationTensor::linear_combination(&[(w, &plus), (-w, &minus)]))
}

/// Weights `w_m` with `f'(x) = Σ_m w_m f(x + m π / (2R + 1))` for every
/// `f(x) = a_0 + Σ_{r=1..R} a_r cos(2 r x) + b_r sin(2 r x)`.
///
/// Solves the interpolation system by SVD; `None` if it is ill-conditioned.
pub fn trig_weights(r: usize) -> Option<Vec<f64>> {
    let m = 2 * r + 1;
    let step = PI / m as f64;
    // columns: 1, cos(2x), sin(2x), cos(4x), sin(4x), ...
    let design = DMatrix::from_fn(m, m, |row, col| {
        let x = row as f64 * step;
        if col == 0 {
            1.0
        } else {
            let freq = 2.0 * col.div_ceil(2) as f64;
            if col % 2 == 1 {
                (freq * x).cos()
            } else {
                (freq * x).sin()
            }
        }
    });
    let svd = design.svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(min > 0.0 && max / min <= MAX_CONDITION) {
        return None;
    }
    let pinv = svd.pseudo_inverse(0.0).ok()?;
    // derivative at 0 of the fitted polynomial is Σ_r 2r b_r
    let mut d = DMatrix::zeros(1, m);
    for k in 1..=r {
        d[(0, 2 * k)] = 2.0 * k as f64;
    }
    Some((d * pinv).iter().copied().collect())
}
