use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, check_dims, dot, Vector};
use crate::error::Result;

/// Relative rank tolerance, scaled by the largest input norm.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of the span of a vector list, produced by modified
/// Gram–Schmidt with one full reorthogonalization pass.
#[derive(Debug, Clone)]
pub struct Orthonormal {
    dim: usize,
    basis: Vec<Vector>,
    /// Indices of the inputs that contributed a new direction.
    pivots: Vec<usize>,
    /// `r[k][l]` is the coefficient of `basis[l]` in input `pivots[k]` (l <= k).
    r: Vec<Vec<f64>>,
    tol: f64,
}

impl Orthonormal {
    pub fn empty(dim: usize) -> Self {
        Self { dim, basis: Vec::new(), pivots: Vec::new(), r: Vec::new(), tol: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Absolute tolerance below which a residual counts as zero.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Removes the span component from `w` in place; returns the projection
    /// coefficients accumulated over both passes.
    fn project_out(&self, w: &mut [f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.basis.len()];
        for _ in 0..2 {
            for (c, q) in coeffs.iter_mut().zip(&self.basis) {
                let p = dot(q.as_slice(), w);
                axpy(w, -p, q.as_slice());
                *c += p;
            }
        }
        coeffs
    }

    /// Component of `v` orthogonal to the span.
    pub fn residual(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        self.project_out(w.as_mut_slice());
        w
    }

    pub fn distance(&self, v: &Vector) -> f64 {
        self.residual(v).norm2()
    }

    /// Appends `v` if it is independent of the current span under the
    /// tolerance `tol`; returns whether a direction was added.
    pub fn push(&mut self, v: &Vector, index: usize, tol: f64) -> bool {
        let mut w = v.clone();
        let mut coeffs = self.project_out(w.as_mut_slice());
        let nrm = w.norm2();
        if nrm <= tol || nrm == 0.0 {
            return false;
        }
        let inv = 1.0 / nrm;
        for x in w.as_mut_slice() {
            *x *= inv;
        }
        coeffs.push(nrm);
        self.basis.push(w);
        self.pivots.push(index);
        self.r.push(coeffs);
        true
    }

    /// Coefficients `c` (one per pivot) minimizing `|sum_k c_k input[pivots[k]] - v|`.
    pub fn express(&self, v: &Vector) -> Vec<f64> {
        let mut w = v.clone();
        let mut c = self.project_out(w.as_mut_slice());
        // back substitution on the upper-triangular R
        for k in (0..c.len()).rev() {
            c[k] /= self.r[k][k];
            let ck = c[k];
            for l in 0..k {
                c[l] -= ck * self.r[k][l];
            }
        }
        c
    }
}

/// Orthonormalizes `vectors` (all of dimension `dim`). Inputs whose residual
/// falls below `RANK_TOL` times the largest input norm are treated as
/// dependent and skipped.
pub fn orthonormalize(vectors: &[Vector], dim: usize) -> Result<Orthonormal> {
    check_dims(vectors, dim)?;
    let scale = vectors.iter().map(Vector::norm2).fold(0.0, f64::max);
    let tol = RANK_TOL * scale;
    let mut out = Orthonormal::empty(dim);
    out.tol = tol;
    for (i, v) in vectors.iter().enumerate() {
        out.push(v, i, tol);
    }
    Ok(out)
}

/// Euclidean distance from `v` to the linear span of `basis`.
pub fn dist_to_span(v: &Vector, basis: &[Vector]) -> Result<f64> {
    let orth = orthonormalize(basis, v.dim())?;
    Ok(orth.distance(v))
}
