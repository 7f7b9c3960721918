//! Rectangular block interleaving for coded bits and LLRs.
//!
//! Values are written row-wise into a matrix with `block_size` columns and
//! read back column-wise; a final short row is permitted and the column read
//! skips the absent cells. Applying [`interleave`] at the transmitter and
//! [`deinterleave`] at the receiver spreads transmitted neighbors across
//! fading blocks.

use crate::error::{Error, Result};

/// Geometry of one rectangular interleaver: `block_size` is the row length,
/// `total_length` the sequence length it permutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterleaverSpec {
    block_size: usize,
    total_length: usize,
}

impl InterleaverSpec {
    pub fn new(block_size: usize, total_length: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::BadInterleaverBlock);
        }
        Ok(Self {
            block_size,
            total_length,
        })
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn total_length(&self) -> usize {
        self.total_length
    }

    /// Number of (possibly short) rows.
    pub fn rows(&self) -> usize {
        self.total_length.div_ceil(self.block_size)
    }
}

/// Row-write, column-read permutation of `seq`.
pub fn interleave<T: Clone>(seq: &[T], spec: &InterleaverSpec) -> Result<Vec<T>> {
    check_len(seq.len(), spec)?;
    let (s, n) = (spec.block_size, spec.total_length);
    let mut out = Vec::with_capacity(n);
    for col in 0..s {
        for row in 0..spec.rows() {
            let idx = row * s + col;
            if idx < n {
                out.push(seq[idx].clone());
            }
        }
    }
    Ok(out)
}

/// Exact inverse of [`interleave`] for the same spec.
pub fn deinterleave<T: Clone + Default>(seq: &[T], spec: &InterleaverSpec) -> Result<Vec<T>> {
    check_len(seq.len(), spec)?;
    let (s, n) = (spec.block_size, spec.total_length);
    let mut out = vec![T::default(); n];
    let mut pos = 0;
    for col in 0..s {
        for row in 0..spec.rows() {
            let idx = row * s + col;
            if idx < n {
                out[idx] = seq[pos].clone();
                pos += 1;
            }
        }
    }
    Ok(out)
}

fn check_len(got: usize, spec: &InterleaverSpec) -> Result<()> {
    if got != spec.total_length {
        return Err(Error::InterleaveLength {
            got,
            want: spec.total_length,
        });
    }
    Ok(())
}
