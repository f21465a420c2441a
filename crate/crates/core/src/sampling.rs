//! Seeded random objects: Gaussian matrices, Gluskin polytopes and unit
//! directions. Every sampler is a pure function of its shape and [`Seed`].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{GaussianStream, Seed};

/// `n x m` matrix of i.i.d. standard normals.
///
/// Entries are drawn column by column, so the first `m'` columns of an
/// `n x m` sample equal the `n x m'` sample under the same seed.
pub fn sample_gaussian_matrix(n: usize, m: usize, seed: Seed) -> Matrix {
    let mut stream = GaussianStream::new(seed);
    let mut data = alloc::vec![0.0; n * m];
    for j in 0..m {
        for i in 0..n {
            data[i * m + j] = stream.next_gaussian();
        }
    }
    Matrix::from_row_major(n, m, data).expect("gaussian samples are finite")
}

/// `conv{±G_1, …, ±G_m}` for the columns `G_i` of `gamma`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GluskinPolytope {
    gamma: Matrix,
    seed: Option<Seed>,
}

impl GluskinPolytope {
    /// Wraps explicit generator data (columns of `gamma`).
    pub fn from_matrix(gamma: Matrix) -> Result<Self> {
        if gamma.rows() == 0 || gamma.cols() == 0 {
            return Err(Error::InvalidShape(alloc::format!("{}x{} generator matrix", gamma.rows(), gamma.cols())));
        }
        Ok(Self { gamma, seed: None })
    }

    pub fn n(&self) -> usize {
        self.gamma.rows()
    }

    pub fn m(&self) -> usize {
        self.gamma.cols()
    }

    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }

    pub fn seed(&self) -> Option<Seed> {
        self.seed
    }

    pub fn generators(&self) -> Vec<Vector> {
        self.gamma.columns()
    }
}

pub fn sample_gluskin(n: usize, m: usize, seed: Seed) -> Result<GluskinPolytope> {
    if n < 2 || m < n {
        return Err(Error::InvalidParameters(alloc::format!("gluskin polytope needs n >= 2 and m >= n, got n={n}, m={m}")));
    }
    Ok(GluskinPolytope { gamma: sample_gaussian_matrix(n, m, seed), seed: Some(seed) })
}

/// `count` uniformly random unit vectors in `R^n` (normalized Gaussians).
/// A shorter request is a prefix of a longer one under the same seed.
pub fn sample_unit_directions(n: usize, count: usize, seed: Seed) -> Vec<Vector> {
    let mut stream = GaussianStream::new(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = alloc::vec![0.0; n];
        stream.fill_gaussian(&mut v);
        let v = Vector::from(v);
        let norm = v.norm2();
        if norm > 1e-300 {
            out.push(v.scaled(1.0 / norm));
        }
    }
    out
}
