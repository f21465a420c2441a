//! Dense linear algebra on small matrices.
//!
//! Everything here works on unit-scale Gaussian data with dimensions up to a
//! few hundred, so the kernels are plain loops over row-major storage.

mod lu;
mod orth;
mod svd;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};

pub use lu::{solve_linear, LuFactor};
pub use orth::{dist_to_span, orthonormalize, Orthonormal, RANK_TOL};
pub use svd::{singular_values, smallest_singular_value};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![0.0; dim] }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { data })
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn norm1(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector { data: self.data.iter().map(|x| c * x).collect() }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Vector) {
        axpy(&mut self.data, c, &other.data);
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector { data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector { data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }
}

impl From<Vec<f64>> for Vector {
    /// Unchecked conversion; prefer [`Vector::new`] for external data.
    fn from(data: Vec<f64>) -> Self {
        Self { data }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vector]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vector::dim);
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.dim() });
            }
            for i in 0..rows {
                m.data[i * cols + j] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vector {
        Vector { data: (0..self.rows).map(|i| self.get(i, j)).collect() }
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.dim() });
        }
        Ok(Vector { data: (0..self.rows).map(|i| dot(self.row(i), v.as_slice())).collect() })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if other.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a != 0.0 {
                    axpy(dst, a, other.row(k));
                }
            }
        }
        Ok(out)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

pub(crate) fn check_dims(vectors: &[Vector], dim: usize) -> Result<()> {
    match vectors.iter().find(|v| v.dim() != dim) {
        Some(v) => Err(Error::DimensionMismatch { expected: dim, found: v.dim() }),
        None => Ok(()),
    }
}
