//! Block-structured vectors over the product space `X_1 x ... x X_n`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{CpmError, Result};

/// A real vector split into one block per player.
///
/// Used both for joint strategy profiles and for stacked gradients such as
/// the game operator `F(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVec {
    blocks: Vec<Vec<f64>>,
}

/// A point of the joint strategy space.
pub type JointPoint = BlockVec;

impl BlockVec {
    pub fn new(blocks: Vec<Vec<f64>>) -> Self {
        Self { blocks }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self { blocks: dims.iter().map(|&d| vec![0.0; d]).collect() }
    }

    /// Splits a flat vector according to `dims`.
    pub fn from_flat(dims: &[usize], flat: &[f64]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if flat.len() != total {
            return Err(CpmError::shape(alloc::format!("flat vector has length {}, expected {}", flat.len(), total)));
        }
        let mut blocks = Vec::with_capacity(dims.len());
        let mut offset = 0;
        for &d in dims {
            blocks.push(flat[offset..offset + d].to_vec());
            offset += d;
        }
        Ok(Self { blocks })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn same_shape(&self, other: &BlockVec) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a.len() == b.len())
    }

    pub(crate) fn check_dims(&self, dims: &[usize], what: &str) -> Result<()> {
        if self.blocks.len() != dims.len() || self.blocks.iter().zip(dims).any(|(b, &d)| b.len() != d) {
            return Err(CpmError::shape(alloc::format!(
                "{what} has block dimensions {:?}, expected {:?}",
                self.dims(),
                dims
            )));
        }
        Ok(())
    }

    /// `self - other`, blockwise. Panics on shape mismatch.
    pub fn sub(&self, other: &BlockVec) -> BlockVec {
        assert!(self.same_shape(other), "block shape mismatch");
        BlockVec {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> BlockVec {
        BlockVec { blocks: self.blocks.iter().map(|b| b.iter().map(|x| x * factor).collect()).collect() }
    }

    pub fn dot(&self, other: &BlockVec) -> f64 {
        assert!(self.same_shape(other), "block shape mismatch");
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| dot(a, b)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &BlockVec) -> f64 {
        assert!(self.same_shape(other), "block shape mismatch");
        self.blocks.iter().flatten().zip(other.blocks.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Replaces block `i`, returning the modified copy.
    pub fn with_block(&self, i: usize, block: Vec<f64>) -> BlockVec {
        let mut out = self.clone();
        out.blocks[i] = block;
        out
    }
}

impl Index<usize> for BlockVec {
    type Output = [f64];

    fn index(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }
}

impl From<Vec<Vec<f64>>> for BlockVec {
    fn from(blocks: Vec<Vec<f64>>) -> Self {
        Self::new(blocks)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
