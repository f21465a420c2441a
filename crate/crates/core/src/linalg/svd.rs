use alloc::vec;
use alloc::vec::Vec;

use super::{axpy, dot, norm2, Matrix};
use crate::error::{Error, Result};

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 60;

/// Column-oriented copy of a tall matrix (rows >= cols).
fn tall_columns(m: &Matrix) -> Vec<Vec<f64>> {
    if m.rows() >= m.cols() {
        (0..m.cols()).map(|j| m.col(j).into_inner()).collect()
    } else {
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    }
}

/// Thin QR by modified Gram–Schmidt with reorthogonalization. Returns R as
/// columns (`r[j][i]`, i <= j). Zero residual columns get a zero diagonal.
fn qr_r_factor(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let c = a.len();
    let mut r = vec![vec![0.0; c]; c];
    let mut q: Vec<Option<Vec<f64>>> = Vec::with_capacity(c);
    let scale = a.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    for j in 0..c {
        let mut w = core::mem::take(&mut a[j]);
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                if let Some(qk) = qk {
                    let p = dot(qk, &w);
                    axpy(&mut w, -p, qk);
                    r[j][k] += p;
                }
            }
        }
        let nrm = norm2(&w);
        r[j][j] = nrm;
        if nrm > 1e-300 && nrm > f64::EPSILON * 1e-3 * scale {
            let inv = 1.0 / nrm;
            w.iter_mut().for_each(|x| *x *= inv);
            q.push(Some(w));
        } else {
            r[j][j] = 0.0;
            q.push(None);
        }
    }
    r
}

/// One-sided (Hestenes) Jacobi on the columns of `u`; returns column norms.
fn one_sided_jacobi(mut u: Vec<Vec<f64>>) -> Vec<f64> {
    let c = u.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = dot(&u[p], &u[p]);
                let beta = dot(&u[q], &u[q]);
                let gamma = dot(&u[p], &u[q]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = cs * t;
                let (left, right) = u.split_at_mut(q);
                for (a, b) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let x = *a;
                    let y = *b;
                    *a = cs * x - sn * y;
                    *b = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    u.iter().map(|col| norm2(col)).collect()
}

/// All `min(rows, cols)` singular values in descending order.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::InvalidShape(alloc::format!("empty matrix {}x{}", m.rows(), m.cols())));
    }
    let cols = tall_columns(m);
    let r = qr_r_factor(cols);
    // columns of R, as full length-c vectors
    let c = r.len();
    let u: Vec<Vec<f64>> = (0..c).map(|j| (0..c).map(|i| if i <= j { r[j][i] } else { 0.0 }).collect()).collect();
    let mut s = one_sided_jacobi(u);
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Smallest singular value, `σ_min(M)`.
pub fn smallest_singular_value(m: &Matrix) -> Result<f64> {
    Ok(*singular_values(m)?.last().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{GaussianStream, Seed};

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut s = GaussianStream::new(Seed::new(seed));
        Matrix::from_row_major(rows, cols, (0..rows * cols).map(|_| s.next_gaussian()).collect()).unwrap()
    }

    #[test]
    fn identity_and_diagonal() {
        assert!((smallest_singular_value(&Matrix::identity(3)).unwrap() - 1.0).abs() < 1e-15);
        let d = Matrix::diag(&[1.0, 2.0, 3.0]);
        let s = singular_values(&d).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_has_zero() {
        let m = Matrix::from_row_major(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
        assert!(smallest_singular_value(&m).unwrap() < 1e-12);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(smallest_singular_value(&Matrix::zeros(0, 3)).is_err());
    }

    /// Oracle: cyclic Jacobi eigenvalue iteration on the Gram matrix MᵀM.
    fn jacobi_eig_min(m: &Matrix) -> f64 {
        let g = m.transpose().mul(m).unwrap();
        let n = g.rows();
        let mut a: Vec<Vec<f64>> = (0..n).map(|i| g.row(i).to_vec()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min).max(0.0).sqrt()
    }

    #[test]
    fn matches_gram_eigen_oracle() {
        for seed in 0..20 {
            let m = random(8, 5, seed);
            let ours = smallest_singular_value(&m).unwrap();
            let oracle = jacobi_eig_min(&m);
            assert!((ours - oracle).abs() <= 1e-9, "seed {seed}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn transpose_invariant() {
        for seed in 0..20 {
            let m = random(7, 4 + (seed as usize % 5), 100 + seed);
            let a = smallest_singular_value(&m).unwrap();
            let b = smallest_singular_value(&m.transpose()).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
        }
    }

    #[test]
    fn frobenius_identity() {
        let m = random(30, 6, 7);
        let s = singular_values(&m).unwrap();
        let fro: f64 = m.as_slice().iter().map(|x| x * x).sum();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        assert!((fro - ss).abs() <= 1e-10 * fro);
    }
}
