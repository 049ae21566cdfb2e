//! Dense building blocks shared by the attention network and the GCN.

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

pub fn relu(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|x| x.max(0.0))
}

/// Zeroes `grad` wherever the pre-activation `z` is not positive.
pub fn relu_backward(z: &DMatrix<f64>, grad: &DMatrix<f64>) -> DMatrix<f64> {
    z.zip_map(grad, |x, g| if x > 0.0 { g } else { 0.0 })
}

/// Column concatenation `[a ‖ b]`.
pub fn hconcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Adds the `1 × c` row vector `b` to every row of `m`.
pub fn add_row_bias(m: &mut DMatrix<f64>, b: DMatrixView<'_, f64>) {
    for mut row in m.row_iter_mut() {
        for (x, y) in row.iter_mut().zip(b.iter()) {
            *x += y;
        }
    }
}

/// Column sums as a `1 × c` matrix.
pub fn column_sums(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(1, m.ncols(), |_, c| m.column(c).sum())
}

/// Column means as a `1 × c` matrix.
pub fn mean_pool(m: &DMatrix<f64>) -> DMatrix<f64> {
    column_sums(m) / m.nrows() as f64
}

/// `σ((A H ‖ H) W)` with `σ = ReLU`.
pub fn layer_forward(h: &DMatrix<f64>, a: &DMatrix<f64>, w: DMatrixView<'_, f64>) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    if a.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "attention is {:?} for {n} nodes",
            a.shape()
        )));
    }
    if w.nrows() != 2 * h.ncols() {
        return Err(Error::Shape(format!(
            "weight has {} rows, expected 2 x {} input features",
            w.nrows(),
            h.ncols()
        )));
    }
    Ok(relu(&(hconcat(&(a * h), h) * w)))
}

/// Concatenation of per-head [`layer_forward`] outputs, in head order.
pub fn multi_head_forward(
    h: &DMatrix<f64>,
    heads: &[(DMatrix<f64>, DMatrixView<'_, f64>)],
) -> Result<DMatrix<f64>> {
    if heads.is_empty() {
        return Err(Error::InvalidArgument("layer needs at least one head".into()));
    }
    let outs = heads
        .iter()
        .map(|(a, w)| layer_forward(h, a, *w))
        .collect::<Result<Vec<_>>>()?;
    let width = outs.iter().map(|o| o.ncols()).sum();
    let mut out = DMatrix::zeros(h.nrows(), width);
    let mut col = 0;
    for o in &outs {
        out.columns_mut(col, o.ncols()).copy_from(o);
        col += o.ncols();
    }
    Ok(out)
}
