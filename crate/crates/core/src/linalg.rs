//! Dense square matrices and the execution strategy for their products.

use serde::ser::{Serialize, SerializeSeq, Serializer};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Execution strategy for data-parallel loops.
///
/// `Parallel` runs on the rayon pool when the `parallel` feature is enabled
/// and falls back to the sequential loop otherwise. Both strategies perform
/// the same floating-point operations in the same order per output element,
/// so results are bit-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim.max(1)).take(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn fill_row(&mut self, row: usize, value: f64) {
        let dim = self.dim;
        self.data[row * dim..(row + 1) * dim].fill(value);
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.scale(factor);
        m
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += b);
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn mul(&self, rhs: &Self, exec: Exec) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let dim = self.dim;
        let mut out = Self::zeros(dim);
        if dim == 0 {
            return out;
        }
        match exec {
            #[cfg(feature = "parallel")]
            Exec::Parallel => out
                .data
                .par_chunks_mut(dim)
                .enumerate()
                .for_each(|(i, row)| self.mul_row_into(rhs, i, row)),
            _ => out
                .data
                .chunks_mut(dim)
                .enumerate()
                .for_each(|(i, row)| self.mul_row_into(rhs, i, row)),
        }
        out
    }

    // Each output element accumulates over k ascending in both strategies.
    #[inline]
    fn mul_row_into(&self, rhs: &Self, i: usize, out: &mut [f64]) {
        for (k, &a) in self.row(i).iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(rhs.row(k)) {
                *o += a * b;
            }
        }
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for row in self.rows() {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}
