//! ℓ1-minimal representations over symmetric generator sets.
//!
//! `x ∈ t·conv{±y_i}` exactly when `min{Σ|λ_i| : Σ λ_i y_i = x} <= t`. The
//! minimum is a small LP, solved here by a dense two-phase simplex over the
//! split `λ = λ⁺ − λ⁻` with Bland's rule.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{check_dims, orthonormalize, Orthonormal, Vector};

/// Equality feasibility tolerance (absolute, unit-scale data).
pub const FEAS_TOL: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MembershipResult {
    /// `Σ|λ_i|`, or `+inf` when the point is outside the generators' span.
    pub scale: f64,
    pub coefficients: Vector,
    pub support: Vec<usize>,
}

impl MembershipResult {
    fn off_span(m: usize) -> Self {
        Self { scale: f64::INFINITY, coefficients: Vector::zeros(m), support: Vec::new() }
    }

    fn from_coefficients(coefficients: Vector) -> Self {
        let support = (0..coefficients.dim()).filter(|&i| coefficients[i] != 0.0).collect();
        Self { scale: coefficients.norm1(), coefficients, support }
    }
}

fn residual_norm(point: &Vector, generators: &[Vector], coefficients: &Vector) -> f64 {
    let mut r = point.clone();
    for (c, y) in coefficients.iter().zip(generators) {
        if *c != 0.0 {
            r.axpy(-c, y);
        }
    }
    r.norm2()
}

/// Dense simplex tableau for `min c·x, A x = b, x >= 0`.
struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + c] = 1.0;
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                for j in 0..w {
                    self.t[i * w + j] -= f * self.t[r * w + j];
                }
                self.t[i * w + c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }

    /// Runs the simplex on cost vector `cost` restricted to the columns in
    /// `allowed`; returns the iteration count used.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool], cap: usize, used: &mut usize) -> Result<()> {
        loop {
            if *used >= cap {
                return Err(Error::NonConvergence(*used));
            }
            // reduced costs d_j = c_j - Σ_i c_{B_i} T_ij; Bland: smallest j with d_j < 0
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for i in 0..self.rows {
                    d -= cost[self.basis[i]] * self.at(i, j);
                }
                if d < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            // the ℓ1 objective is bounded below, so an unbounded ray cannot occur
            let Some((r, _)) = leave else { return Err(Error::NonConvergence(*used)) };
            self.pivot(r, c);
            *used += 1;
        }
    }
}

/// Minimum `Σ|λ_i|` over representations `Σ λ_i y_i = point`.
///
/// Points outside the span of the generators get `scale = +inf`.
pub fn l1_membership_scale(point: &Vector, generators: &[Vector]) -> Result<MembershipResult> {
    let n = point.dim();
    let m = generators.len();
    if m == 0 {
        return Err(Error::InvalidShape("no generators".into()));
    }
    check_dims(generators, n)?;
    if point.norm_inf() == 0.0 {
        return Ok(MembershipResult::from_coefficients(Vector::zeros(m)));
    }
    let span = orthonormalize(generators, n)?;
    if span.distance(point) > FEAS_TOL * (1.0 + point.norm2()) {
        return Ok(MembershipResult::off_span(m));
    }

    // columns: λ⁺ (0..m), λ⁻ (m..2m), artificials (2m..2m+n)
    let cols = 2 * m + n;
    let mut tab = Tableau { rows: n, cols, t: vec![0.0; n * (cols + 1)], basis: (2 * m..2 * m + n).collect() };
    for i in 0..n {
        let sign = if point[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut tab.t[i * (cols + 1)..(i + 1) * (cols + 1)];
        for (j, y) in generators.iter().enumerate() {
            row[j] = sign * y[i];
            row[m + j] = -sign * y[i];
        }
        row[2 * m + i] = 1.0;
        row[cols] = sign * point[i];
    }
    let cap = 50 * (cols + n) + 1000;
    let mut used = 0;

    let mut phase1 = vec![0.0; cols];
    phase1[2 * m..].iter_mut().for_each(|c| *c = 1.0);
    tab.optimize(&phase1, &vec![true; cols], cap, &mut used)?;
    let infeasibility: f64 = (0..tab.rows).filter(|&i| tab.basis[i] >= 2 * m).map(|i| tab.rhs(i)).sum();
    if infeasibility > FEAS_TOL * (1.0 + point.norm1()) {
        return Ok(MembershipResult::off_span(m));
    }
    // drive artificials out of the basis; rows with nothing to pivot on are redundant
    let mut i = 0;
    while i < tab.rows {
        if tab.basis[i] >= 2 * m {
            let c = (0..2 * m).filter(|j| !tab.basis.contains(j)).max_by(|&a, &b| tab.at(i, a).abs().total_cmp(&tab.at(i, b).abs()));
            match c {
                Some(c) if tab.at(i, c).abs() > 1e-9 => {
                    tab.pivot(i, c);
                    i += 1;
                }
                _ => tab.remove_row(i),
            }
        } else {
            i += 1;
        }
    }

    let mut phase2 = vec![1.0; cols];
    phase2[2 * m..].iter_mut().for_each(|c| *c = 0.0);
    let allowed: Vec<bool> = (0..cols).map(|j| j < 2 * m).collect();
    tab.optimize(&phase2, &allowed, cap, &mut used)?;

    let mut lambda = vec![0.0; m];
    for r in 0..tab.rows {
        let b = tab.basis[r];
        let v = tab.rhs(r).max(0.0);
        if b < m {
            lambda[b] += v;
        } else if b < 2 * m {
            lambda[b - m] -= v;
        }
    }
    let coefficients = polish(point, generators, Vector::from(lambda));
    let res = residual_norm(point, generators, &coefficients);
    if res > RESIDUAL_TOL * (1.0 + point.norm2()) {
        return Err(Error::NonConvergence(used));
    }
    Ok(MembershipResult::from_coefficients(coefficients))
}

/// Re-solves for the coefficients on the current support by least squares,
/// keeping the support and removing tableau round-off.
fn polish(point: &Vector, generators: &[Vector], lambda: Vector) -> Vector {
    let support: Vec<usize> = (0..lambda.dim()).filter(|&i| lambda[i] != 0.0).collect();
    if support.is_empty() {
        return lambda;
    }
    let cols: Vec<Vector> = support.iter().map(|&i| generators[i].clone()).collect();
    let Ok(orth) = orthonormalize(&cols, point.dim()) else { return lambda };
    if orth.rank() != support.len() {
        return lambda;
    }
    let c = orth.express(point);
    let mut out = vec![0.0; lambda.dim()];
    for (k, &i) in support.iter().enumerate() {
        // a sign flip would change the objective; keep the tableau value then
        if c[k].signum() != lambda[i].signum() {
            return lambda;
        }
        out[i] = c[k];
    }
    Vector::from(out)
}

/// Rewrites a representation `Σ c_i y_i = point` on at most `dim(point)`
/// generators without increasing `Σ|c_i|`.
pub fn caratheodory_reduce(point: &Vector, generators: &[Vector], coefficients: &Vector) -> Result<MembershipResult> {
    let n = point.dim();
    check_dims(generators, n)?;
    if coefficients.dim() != generators.len() {
        return Err(Error::DimensionMismatch { expected: generators.len(), found: coefficients.dim() });
    }
    let tol = RESIDUAL_TOL * (1.0 + point.norm2());
    let residual = residual_norm(point, generators, coefficients);
    if !(residual <= tol) {
        return Err(Error::InvalidRepresentation { residual });
    }
    let mut c = coefficients.clone().into_inner();
    let scale = generators.iter().map(Vector::norm2).fold(0.0, f64::max);
    loop {
        let support: Vec<usize> = (0..c.len()).filter(|&i| c[i] != 0.0).collect();
        let mut orth = Orthonormal::empty(n);
        let rank_tol = crate::linalg::RANK_TOL * scale;
        let mut dependent = None;
        for (k, &i) in support.iter().enumerate() {
            if !orth.push(&generators[i], k, rank_tol) {
                dependent = Some(i);
                break;
            }
        }
        let Some(d) = dependent else { break };
        // null vector z: y_d - Σ e_k y_{p_k} = 0
        let e = orth.express(&generators[d]);
        let mut z: Vec<(usize, f64)> = orth.pivots().iter().zip(&e).map(|(&k, &ek)| (support[k], -ek)).collect();
        z.push((d, 1.0));
        let slope: f64 = z.iter().map(|&(i, zi)| c[i].signum() * zi).sum();
        if slope > 0.0 {
            z.iter_mut().for_each(|(_, zi)| *zi = -*zi);
        }
        // step to the first zero crossing; ℓ1 is non-increasing along the way
        let (hit, t) = z
            .iter()
            .filter(|&&(i, zi)| c[i] * zi < 0.0)
            .map(|&(i, zi)| (i, -c[i] / zi))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("a null vector with non-positive ℓ1 slope has a sign-opposed entry");
        for &(i, zi) in &z {
            c[i] += t * zi;
        }
        c[hit] = 0.0;
    }
    let out = Vector::from(c);
    let residual = residual_norm(point, generators, &out);
    if residual > tol {
        return Err(Error::InvalidRepresentation { residual });
    }
    Ok(MembershipResult::from_coefficients(out))
}
