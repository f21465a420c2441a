use alloc::vec::Vec;

use super::{Matrix, Vector};
use crate::error::{Error, Result};

/// Pivots below this fraction of the largest entry mark the matrix singular.
const PIVOT_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-9;

/// LU factorization with partial pivoting, `P X = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    original: Matrix,
}

impl LuFactor {
    pub fn new(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        if x.cols() != n {
            return Err(Error::InvalidShape(alloc::format!("expected square matrix, got {}x{}", n, x.cols())));
        }
        let scale = x.max_abs();
        if n == 0 || scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let mut lu = x.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv < PIVOT_TOL * scale {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, original: x.clone() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves into `out` without allocating; `b` and `out` have length `n`.
    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i * n + j] * out[j];
            }
            out[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = out[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * out[j];
            }
            out[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves `X λ = b` with one step of iterative refinement; fails with
    /// `SingularMatrix` when the residual stays above `1e-9 (1 + |b|)`.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if b.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: b.dim() });
        }
        let mut x = Vector::zeros(self.n);
        self.solve_into(b.as_slice(), x.as_mut_slice());
        let bound = RESIDUAL_TOL * (1.0 + b.norm2());
        let r = b.sub(&self.original.mul_vec(&x)?);
        if r.norm2() <= bound {
            return Ok(x);
        }
        let mut dx = Vector::zeros(self.n);
        self.solve_into(r.as_slice(), dx.as_mut_slice());
        x.axpy(1.0, &dx);
        let r = b.sub(&self.original.mul_vec(&x)?);
        if r.norm2() <= bound && x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::SingularMatrix)
        }
    }
}

/// Solves the square system `X λ = b` by partially pivoted elimination.
pub fn solve_linear(x: &Matrix, b: &Vector) -> Result<Vector> {
    LuFactor::new(x)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{GaussianStream, Seed};
    use alloc::vec;

    #[test]
    fn identity_system() {
        let x = solve_linear(&Matrix::identity(2), &Vector::from(vec![1.0, 2.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn diagonal_system() {
        let x = solve_linear(&Matrix::diag(&[2.0, 4.0]), &Vector::from(vec![2.0, 4.0])).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn singular_is_reported() {
        let x = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(solve_linear(&x, &Vector::from(vec![1.0, 1.0])).unwrap_err(), Error::SingularMatrix);
        assert!(LuFactor::new(&Matrix::zeros(3, 3)).is_err());
        assert!(matches!(LuFactor::new(&Matrix::zeros(2, 3)), Err(Error::InvalidShape(_))));
    }

    #[test]
    fn random_well_conditioned_residual() {
        let mut s = GaussianStream::new(Seed::new(99));
        let n = 20;
        // diagonally dominated Gaussian matrix
        let mut x = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let g = s.next_gaussian();
                x.set(i, j, if i == j { g + 10.0 } else { g });
            }
        }
        let b = Vector::from((0..n).map(|_| s.next_gaussian()).collect::<Vec<_>>());
        let lam = solve_linear(&x, &b).unwrap();
        let r = b.sub(&x.mul_vec(&lam).unwrap());
        assert!(r.norm2() <= 1e-9 * (1.0 + b.norm2()));
    }
}
