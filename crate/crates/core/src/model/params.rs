//! Flat parameter storage: every classical tensor of a model lives in one
//! `Vec<f64>`, so optimizers and gradients share a single layout.

use nalgebra::{DMatrix, DMatrixView};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Handle of one tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockId(usize);

impl BlockId {
    pub fn index(self) -> usize {
        self.0
    }

    #[cfg(test)]
    pub(crate) fn from_index(i: usize) -> Self {
        Self(i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    offset: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named matrices stored column-major back to back.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    data: Vec<f64>,
    blocks: Vec<Block>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a zero-initialized `rows × cols` block.
    pub fn push(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> BlockId {
        let offset = self.data.len();
        self.data.resize(offset + rows * cols, 0.0);
        self.blocks.push(Block {
            name: name.into(),
            rows,
            cols,
            offset,
        });
        BlockId(self.blocks.len() - 1)
    }

    /// Fills a block uniformly in `±sqrt(6 / (rows + cols))`.
    pub fn glorot(&mut self, id: BlockId, rng: &mut impl Rng) {
        let b = &self.blocks[id.0];
        let limit = (6.0 / (b.rows + b.cols) as f64).sqrt();
        for x in self.block_mut(id) {
            *x = rng.random_range(-limit..=limit);
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_info(&self, id: BlockId) -> &Block {
        &self.blocks[id.0]
    }

    pub fn block(&self, id: BlockId) -> &[f64] {
        let b = &self.blocks[id.0];
        &self.data[b.offset..b.offset + b.len()]
    }

    pub fn block_mut(&mut self, id: BlockId) -> &mut [f64] {
        let b = &self.blocks[id.0];
        let range = b.offset..b.offset + b.len();
        &mut self.data[range]
    }

    pub fn matrix(&self, id: BlockId) -> DMatrixView<'_, f64> {
        let b = &self.blocks[id.0];
        DMatrixView::from_slice(self.block(id), b.rows, b.cols)
    }

    /// Same layout, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            data: vec![0.0; self.data.len()],
            blocks: self.blocks.clone(),
        }
    }

    /// Adds `m` into block `id`; shapes must agree.
    pub fn accumulate(&mut self, id: BlockId, m: &DMatrix<f64>) {
        let b = &self.blocks[id.0];
        debug_assert_eq!((b.rows, b.cols), m.shape(), "block {}", b.name);
        for (x, y) in self.block_mut(id).iter_mut().zip(m.as_slice()) {
            *x += y;
        }
    }

    pub fn add_scaled(&mut self, other: &ParamStore, scale: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += scale * y;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn to_records(&self) -> Vec<BlockRecord> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let m = self.matrix(BlockId(i));
                BlockRecord {
                    name: b.name.clone(),
                    rows: b.rows,
                    cols: b.cols,
                    values: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
                }
            })
            .collect()
    }

    /// Overwrites every block from `records`, which must match names and shapes.
    pub fn load_records(&mut self, records: &[BlockRecord]) -> Result<()> {
        if records.len() != self.blocks.len() {
            return Err(Error::Data(format!(
                "checkpoint has {} tensors, model expects {}",
                records.len(),
                self.blocks.len()
            )));
        }
        for (i, r) in records.iter().enumerate() {
            let b = self.blocks[i].clone();
            if r.name != b.name || r.rows != b.rows || r.cols != b.cols {
                return Err(Error::Data(format!(
                    "tensor {i}: checkpoint has {} ({}x{}), model expects {} ({}x{})",
                    r.name, r.rows, r.cols, b.name, b.rows, b.cols
                )));
            }
            if r.values.len() != b.rows || r.values.iter().any(|row| row.len() != b.cols) {
                return Err(Error::Data(format!("tensor {}: ragged values", r.name)));
            }
            let m = DMatrix::from_fn(b.rows, b.cols, |i, j| r.values[i][j]);
            self.block_mut(BlockId(i)).copy_from_slice(m.as_slice());
        }
        Ok(())
    }
}

/// Serialized tensor, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Vec<f64>>,
}
