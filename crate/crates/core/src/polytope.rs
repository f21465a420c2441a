//! Cross-polytopes, coefficient matrices and the predicates built on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{check_dims, orthonormalize, singular_values, LuFactor, Matrix, Orthonormal, Vector, RANK_TOL};
use crate::lp::l1_membership_scale;
use crate::rng::{GaussianStream, Seed};
use crate::sampling::{sample_unit_directions, GluskinPolytope};
use crate::stats::ln_binomial;

/// An origin-symmetric convex hull `conv{±y_i}` that can report the
/// smallest `t` with `v ∈ t·hull`.
pub trait SymmetricBody {
    fn dim(&self) -> usize;
    /// `+inf` when `v` lies outside the span of the generators.
    fn membership_scale(&self, v: &Vector) -> Result<f64>;

    /// Monte Carlo fast path; `scratch` is reusable workspace.
    fn sample_scale(&self, g: &[f64], scratch: &mut Vec<f64>) -> Result<f64> {
        let _ = scratch;
        self.membership_scale(&Vector::from(g.to_vec()))
    }

    /// Zero-measure bodies (dependent generators).
    fn is_degenerate(&self) -> bool {
        false
    }
}

/// `conv{±x_1, …, ±x_n}` in `R^n`.
#[derive(Debug, Clone)]
pub struct CrossPolytope {
    generators: Vec<Vector>,
    lu: Option<LuFactor>,
}

impl CrossPolytope {
    pub fn new(generators: Vec<Vector>) -> Result<Self> {
        let n = generators.len();
        if n == 0 {
            return Err(Error::InvalidShape("cross-polytope needs at least one generator".into()));
        }
        check_dims(&generators, n)?;
        let rank = orthonormalize(&generators, n)?.rank();
        let lu = if rank == n { LuFactor::new(&Matrix::from_columns(&generators)?).ok() } else { None };
        Ok(Self { generators, lu })
    }

    /// `conv{±d_i e_i}`.
    pub fn axis_aligned(norms: &[f64]) -> Result<Self> {
        let n = norms.len();
        Self::new(norms.iter().enumerate().map(|(i, &d)| Vector::basis(n, i).scaled(d)).collect())
    }

    /// The standard `B_1^n`.
    pub fn standard(n: usize) -> Self {
        Self::axis_aligned(&vec![1.0; n]).expect("identity generators")
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    /// LU factors of the generator matrix, absent when degenerate.
    pub fn factor(&self) -> Option<&LuFactor> {
        self.lu.as_ref()
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(&self.generators).expect("generators share a dimension")
    }

    /// `d_i = dist(x_i, span{x_j : j < i})` in list order.
    pub fn sequential_distances(&self) -> Vec<f64> {
        sequential_distances(&self.generators)
    }
}

impl SymmetricBody for CrossPolytope {
    fn dim(&self) -> usize {
        self.n()
    }

    fn membership_scale(&self, v: &Vector) -> Result<f64> {
        if v.dim() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: v.dim() });
        }
        match &self.lu {
            Some(lu) => Ok(lu.solve(v)?.norm1()),
            None => Ok(l1_membership_scale(v, &self.generators)?.scale),
        }
    }

    fn sample_scale(&self, g: &[f64], scratch: &mut Vec<f64>) -> Result<f64> {
        match &self.lu {
            Some(lu) => {
                scratch.resize(g.len(), 0.0);
                lu.solve_into(g, scratch);
                Ok(scratch.iter().map(|x| x.abs()).sum())
            }
            None => Ok(f64::INFINITY),
        }
    }

    fn is_degenerate(&self) -> bool {
        self.lu.is_none()
    }
}

impl SymmetricBody for GluskinPolytope {
    fn dim(&self) -> usize {
        self.n()
    }

    fn membership_scale(&self, v: &Vector) -> Result<f64> {
        Ok(l1_membership_scale(v, &self.generators())?.scale)
    }
}

/// `dist(v_i, span{v_j : j < i})` for every `i`.
pub fn sequential_distances(vectors: &[Vector]) -> Vec<f64> {
    let Some(first) = vectors.first() else { return Vec::new() };
    let scale = vectors.iter().map(Vector::norm2).fold(0.0, f64::max);
    let mut orth = Orthonormal::empty(first.dim());
    vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = orth.distance(v);
            orth.push(v, i, RANK_TOL * scale);
            d
        })
        .collect()
}

/// Smallest `d` with every inner vertex in `d·outer`.
pub fn containment_scale<B: SymmetricBody + ?Sized>(inner: &[Vector], outer: &B) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for v in inner {
        worst = worst.max(outer.membership_scale(v)?);
    }
    Ok(worst)
}

/// Largest `max_i |<u, G_i>|` minimized over the given directions: an upper
/// bound on the inradius, since every support value bounds it from above.
pub fn inradius_upper(p: &GluskinPolytope, directions: &[Vector]) -> Result<f64> {
    let g = p.gamma();
    let (n, m) = (g.rows(), g.cols());
    check_dims(directions, n)?;
    let mut acc = vec![0.0; m];
    let mut best = f64::INFINITY;
    for u in directions {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for k in 0..n {
            crate::linalg::axpy(&mut acc, u[k], g.row(k));
        }
        best = best.min(acc.iter().fold(0.0, |s, a| s.max(a.abs())));
    }
    Ok(best)
}

/// `(lower, upper)` bounds on the inradius of `P`.
///
/// `lower = s_min(Γᵀ)/√m` is certified: for every unit `u`,
/// `max_i |<u, G_i>| >= |Γᵀu|_2/√m >= s_min(Γᵀ)/√m`. `upper` comes from
/// `search_directions` random unit directions.
pub fn inradius_bounds(p: &GluskinPolytope, search_directions: usize, seed: Seed) -> Result<(f64, f64)> {
    let s = singular_values(p.gamma())?;
    let s_min = *s.last().expect("nonempty");
    if p.m() < p.n() || s_min <= RANK_TOL * s[0] {
        return Err(Error::Degenerate);
    }
    let lower = s_min / libm::sqrt(p.m() as f64);
    let upper = inradius_upper(p, &sample_unit_directions(p.n(), search_directions, seed))?;
    Ok((lower, upper))
}

/// Slack for the per-column ℓ1 bound of the class `M_{m,n}`.
pub const CLASS_TOL: f64 = 1e-12;

/// Matrix in `M_{m,n}`: every column has at most `n` nonzeros and ℓ1 norm
/// at most one.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoefficientMatrix {
    entries: Matrix,
    support_limit: usize,
}

impl CoefficientMatrix {
    /// Checks membership in `M_{m,n}` with `n = entries.cols()`.
    pub fn new(entries: Matrix) -> Result<Self> {
        let limit = entries.cols();
        Self::with_support_limit(entries, limit)
    }

    fn with_support_limit(entries: Matrix, support_limit: usize) -> Result<Self> {
        for j in 0..entries.cols() {
            let col = entries.col(j);
            let support = col.iter().filter(|x| **x != 0.0).count();
            if support > support_limit {
                return Err(Error::NotInClass(alloc::format!("column {j} has support {support} > {support_limit}")));
            }
            if col.norm1() > 1.0 + CLASS_TOL {
                return Err(Error::NotInClass(alloc::format!("column {j} has l1 norm {}", col.norm1())));
            }
        }
        Ok(Self { entries, support_limit })
    }

    /// Random element of `M_{m,n}`: each column gets a uniform support size in
    /// `1..=min(n, m)`, Gaussian values, and an ℓ1 norm uniform on `(0, 1]`.
    pub fn random(m: usize, n: usize, seed: Seed) -> Self {
        let mut s = GaussianStream::new(seed);
        let mut a = Matrix::zeros(m, n);
        let mut rows: Vec<usize> = (0..m).collect();
        for j in 0..n {
            let size = 1 + s.next_below(n.min(m) as u64) as usize;
            s.shuffle(&mut rows);
            let vals: Vec<f64> = (0..size).map(|_| s.next_gaussian()).collect();
            let l1: f64 = vals.iter().map(|x| x.abs()).sum();
            let target = 1.0 - s.next_uniform();
            for (&i, v) in rows.iter().zip(&vals) {
                a.set(i, j, v * (target / l1));
            }
        }
        // scaling by target/l1 can overshoot 1 by an ulp; trim
        Self::trim(a, n)
    }

    fn trim(mut a: Matrix, limit: usize) -> Self {
        for j in 0..a.cols() {
            while a.col(j).norm1() > 1.0 {
                for i in 0..a.rows() {
                    a.set(i, j, a.get(i, j) * (1.0 - 1e-15));
                }
            }
        }
        Self::with_support_limit(a, limit).expect("trimmed into class")
    }

    pub fn m(&self) -> usize {
        self.entries.rows()
    }

    pub fn n(&self) -> usize {
        self.entries.cols()
    }

    pub fn support_limit(&self) -> usize {
        self.support_limit
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }
}

/// `sign(a)·k·eps` for the largest integer `k >= 0` with `k·eps <= |a|`.
fn round_toward_zero(a: f64, eps: f64) -> f64 {
    let x = a.abs();
    let mut k = libm::floor(x / eps);
    while k > 0.0 && k * eps > x {
        k -= 1.0;
    }
    while (k + 1.0) * eps <= x {
        k += 1.0;
    }
    if k == 0.0 {
        0.0
    } else {
        libm::copysign(k * eps, a)
    }
}

/// Nearest point of the ε-net toward zero: entries become multiples of
/// `eps`, each moves by less than `eps`, supports and ℓ1 norms cannot grow.
pub fn round_to_net(a: &CoefficientMatrix, eps: f64) -> Result<CoefficientMatrix> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParameters(alloc::format!("eps must lie in (0, 1/2], got {eps}")));
    }
    let src = a.entries();
    let data = src.as_slice().iter().map(|&x| round_toward_zero(x, eps)).collect();
    let m = Matrix::from_row_major(src.rows(), src.cols(), data)?;
    CoefficientMatrix::with_support_limit(m, a.support_limit)
}

/// The α-split `A = F₁(A) + F₂(A)` and the concatenation `F(A) = [F₁ F₂]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SparseSplit {
    pub f1: CoefficientMatrix,
    pub f2: CoefficientMatrix,
    pub f: CoefficientMatrix,
}

pub fn decompose_alpha(a: &CoefficientMatrix, alpha: f64) -> Result<SparseSplit> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameters(alloc::format!("alpha must lie in (0, 1/2], got {alpha}")));
    }
    let (m, n) = (a.m(), a.n());
    let src = a.entries();
    let mut f1 = Matrix::zeros(m, n);
    let mut f2 = Matrix::zeros(m, n);
    let mut f = Matrix::zeros(m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let x = src.get(i, j);
            if x.abs() >= alpha {
                f1.set(i, j, x);
                f.set(i, j, x);
            } else {
                f2.set(i, j, x);
                f.set(i, n + j, x);
            }
        }
    }
    let limit = a.support_limit;
    Ok(SparseSplit {
        f1: CoefficientMatrix::with_support_limit(f1, limit)?,
        f2: CoefficientMatrix::with_support_limit(f2, limit)?,
        f: CoefficientMatrix::with_support_limit(f, limit)?,
    })
}

/// `max_i` of the ℓ1 scale of `Γ·col_i(A)` over the columns of `Γ·F(A)`.
/// `A(B_1^n) ⊂ F(A)(2B_1^{2n})` says this never exceeds 2.
pub fn verify_decomposition_inclusion(a: &CoefficientMatrix, alpha: f64, gamma: &Matrix) -> Result<f64> {
    if gamma.cols() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), found: gamma.cols() });
    }
    let split = decompose_alpha(a, alpha)?;
    let points = gamma.mul(a.entries())?.columns();
    let generators = gamma.mul(split.f.entries())?.columns();
    let mut worst: f64 = 0.0;
    for p in &points {
        worst = worst.max(l1_membership_scale(p, &generators)?.scale);
    }
    Ok(worst)
}

/// `ln` of the net cardinality bound `(C(m,n)·(eps/3)^{-n})^n`.
pub fn net_cardinality_log_bound(n: usize, m: usize, eps: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    n * (ln_binomial(m, n) + n * libm::log(3.0 / eps))
}

/// `ln` of the bound on `|T_p'|`: `p` columns of type (α+) and `n − p` of
/// type (α−), all entries in `eps·Z`.
pub fn tp_prime_log_bound(n: usize, m: usize, eps: f64, alpha: f64, p: usize) -> f64 {
    let (nf, mf, pf) = (n as f64, m as f64, p as f64);
    let ln3e = libm::log(3.0 / eps);
    let plus = ln_binomial(mf, libm::floor(1.0 / alpha)) + ln3e / alpha;
    let minus = ln_binomial(mf, nf) + nf * ln3e;
    pf * plus + (nf - pf) * minus
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CrosspolMode {
    /// All `n!` orders (via subset dynamic programming); `n <= 8`.
    Exact,
    /// Greedy adversaries plus `restarts` random orders.
    Heuristic { restarts: usize, seed: Seed },
}

impl CrosspolMode {
    pub const DEFAULT_RESTARTS: usize = 64;

    pub fn heuristic(seed: Seed) -> Self {
        Self::Heuristic { restarts: Self::DEFAULT_RESTARTS, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Membership {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum VerdictMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrosspolVerdict {
    pub member: Membership,
    /// Smallest count found over the examined orders.
    pub worst_count: usize,
    /// Generator indices in the order achieving `worst_count`.
    pub witness_permutation: Vec<usize>,
    pub mode: VerdictMode,
}

/// `|{i > n−k : dist(x_σ(i), span{x_σ(j) : j < i}) <= h}|` (positions 1-based).
pub fn crosspol_count(p: &CrossPolytope, order: &[usize], k: usize, h: f64) -> usize {
    let ordered: Vec<Vector> = order.iter().map(|&i| p.generators[i].clone()).collect();
    let n = order.len();
    sequential_distances(&ordered).iter().enumerate().filter(|&(i, &d)| i >= n - k && d <= h).count()
}

fn meets_threshold(count: usize, k: usize) -> bool {
    4 * count >= k
}

/// Decides `P ∈ crosspol(k, h)`: under every order of the generators, at
/// least `k/4` of the last `k` lie within `h` of the span of their
/// predecessors.
pub fn crosspol_membership(p: &CrossPolytope, k: usize, h: f64, mode: CrosspolMode) -> Result<CrosspolVerdict> {
    let n = p.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameters(alloc::format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    match mode {
        CrosspolMode::Exact => {
            if n > 8 {
                return Err(Error::TooLarge(alloc::format!("exact crosspol enumeration needs n <= 8, got {n}")));
            }
            let (worst, order) = exact_worst_order(p, k, h);
            let member = if meets_threshold(worst, k) { Membership::Yes } else { Membership::No };
            Ok(CrosspolVerdict { member, worst_count: worst, witness_permutation: order, mode: VerdictMode::Exact })
        }
        CrosspolMode::Heuristic { restarts, seed } => {
            let (worst, order) = heuristic_worst_order(p, k, h, restarts, seed);
            let member = if meets_threshold(worst, k) { Membership::Unknown } else { Membership::No };
            Ok(CrosspolVerdict { member, worst_count: worst, witness_permutation: order, mode: VerdictMode::Heuristic })
        }
    }
}

/// The count only depends on which set precedes each position, so the
/// minimum over orders is a shortest path over subsets.
fn exact_worst_order(p: &CrossPolytope, k: usize, h: f64) -> (usize, Vec<usize>) {
    let n = p.n();
    let full = (1usize << n) - 1;
    let scale = p.generators.iter().map(Vector::norm2).fold(0.0, f64::max);
    let mut best = vec![usize::MAX; full + 1];
    let mut parent = vec![(0usize, 0usize); full + 1];
    best[0] = 0;
    for mask in 0..full {
        if best[mask] == usize::MAX {
            continue;
        }
        let pos = mask.count_ones() as usize;
        let mut orth = Orthonormal::empty(n);
        for i in (0..n).filter(|i| mask & (1 << i) != 0) {
            orth.push(&p.generators[i], i, RANK_TOL * scale);
        }
        for v in (0..n).filter(|v| mask & (1 << v) == 0) {
            let add = usize::from(pos >= n - k && orth.distance(&p.generators[v]) <= h);
            let next = mask | (1 << v);
            if best[mask] + add < best[next] {
                best[next] = best[mask] + add;
                parent[next] = (mask, v);
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    while mask != 0 {
        let (prev, v) = parent[mask];
        order.push(v);
        mask = prev;
    }
    order.reverse();
    (best[full], order)
}

/// Generator indices sorted by a sign-normalized lexicographic key, so the
/// search below does not depend on how the generator list was presented.
fn canonical_order(p: &CrossPolytope) -> Vec<usize> {
    let keys: Vec<Vector> = p
        .generators
        .iter()
        .map(|v| {
            let s = v.iter().find(|x| **x != 0.0).map_or(1.0, |x| x.signum());
            v.scaled(s)
        })
        .collect();
    let mut idx: Vec<usize> = (0..p.n()).collect();
    idx.sort_by(|&a, &b| {
        keys[a].iter().zip(keys[b].iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    });
    idx
}

fn heuristic_worst_order(p: &CrossPolytope, k: usize, h: f64, restarts: usize, seed: Seed) -> (usize, Vec<usize>) {
    let canon = canonical_order(p);
    let scale = p.generators.iter().map(Vector::norm2).fold(0.0, f64::max);
    let tol = RANK_TOL * scale;
    let span_of = |set: &[usize]| {
        let mut orth = Orthonormal::empty(p.n());
        for &i in set {
            orth.push(&p.generators[i], i, tol);
        }
        orth
    };
    let argmax = |cands: &[usize], dist: &dyn Fn(usize) -> f64| {
        let mut best = (cands[0], f64::NEG_INFINITY);
        for &c in cands {
            let d = dist(c);
            if d > best.1 {
                best = (c, d);
            }
        }
        best.0
    };

    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(restarts + 2);
    // backward greedy: fill the last slot with the vector farthest from the rest
    let mut remaining = canon.clone();
    let mut tail = Vec::with_capacity(p.n());
    while !remaining.is_empty() {
        let rem = remaining.clone();
        let pick = argmax(&rem, &|c| {
            let others: Vec<usize> = rem.iter().copied().filter(|&o| o != c).collect();
            span_of(&others).distance(&p.generators[c])
        });
        remaining.retain(|&i| i != pick);
        tail.push(pick);
    }
    tail.reverse();
    candidates.push(tail);
    // forward greedy: place next the vector farthest from what is placed
    let mut placed: Vec<usize> = Vec::with_capacity(p.n());
    let mut rest = canon.clone();
    while !rest.is_empty() {
        let orth = span_of(&placed);
        let pick = argmax(&rest, &|c| orth.distance(&p.generators[c]));
        rest.retain(|&i| i != pick);
        placed.push(pick);
    }
    candidates.push(placed);
    let mut stream = GaussianStream::new(seed);
    for _ in 0..restarts {
        let mut perm = canon.clone();
        stream.shuffle(&mut perm);
        candidates.push(perm);
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    for order in candidates {
        let c = crosspol_count(p, &order, k, h);
        if best.as_ref().map_or(true, |b| c < b.0) {
            best = Some((c, order));
        }
    }
    best.expect("at least one candidate order")
}

/// `4·conv{±x_1, …, ±x_{n−k}, ±(k/n)x_{n−k+1}, …, ±(k/n)x_n}`.
pub fn tilt_rescale(p: &CrossPolytope, k: usize) -> Result<CrossPolytope> {
    let n = p.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameters(alloc::format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let tail = 4.0 * k as f64 / n as f64;
    let gens = p.generators.iter().enumerate().map(|(i, x)| x.scaled(if i < n - k { 4.0 } else { tail })).collect();
    CrossPolytope::new(gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_gluskin;
    use num_bigint::BigUint;

    fn gaussian(s: &mut GaussianStream, n: usize) -> Vector {
        Vector::from((0..n).map(|_| s.next_gaussian()).collect::<Vec<_>>())
    }

    fn random_cross(s: &mut GaussianStream, n: usize) -> CrossPolytope {
        CrossPolytope::new((0..n).map(|_| gaussian(s, n)).collect()).unwrap()
    }

    #[test]
    fn containment_of_own_generators_is_one() {
        let mut s = GaussianStream::new(Seed::new(1));
        for n in [2, 3, 6] {
            let p = random_cross(&mut s, n);
            assert!((containment_scale(p.generators(), &p).unwrap() - 1.0).abs() <= 1e-9);
        }
        let b = CrossPolytope::standard(2);
        assert!((containment_scale(&[Vector::basis(2, 0).scaled(2.0)], &b).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cross_and_lp_paths_agree() {
        let mut s = GaussianStream::new(Seed::new(2));
        for _ in 0..20 {
            let outer = random_cross(&mut s, 3);
            let as_gluskin = GluskinPolytope::from_matrix(outer.matrix()).unwrap();
            let inner: Vec<Vector> = (0..4).map(|_| gaussian(&mut s, 3)).collect();
            let a = containment_scale(&inner, &outer).unwrap();
            let b = containment_scale(&inner, &as_gluskin).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn containment_is_linearly_invariant() {
        let mut s = GaussianStream::new(Seed::new(3));
        let outer = random_cross(&mut s, 4);
        let inner: Vec<Vector> = (0..5).map(|_| gaussian(&mut s, 4)).collect();
        let mut t = Matrix::identity(4);
        for i in 0..4 {
            for j in 0..4 {
                t.set(i, j, t.get(i, j) + 0.3 * s.next_gaussian());
            }
        }
        let map = |v: &Vector| t.mul_vec(v).unwrap();
        let a = containment_scale(&inner, &outer).unwrap();
        let outer_t = CrossPolytope::new(outer.generators().iter().map(map).collect()).unwrap();
        let inner_t: Vec<Vector> = inner.iter().map(map).collect();
        let b = containment_scale(&inner_t, &outer_t).unwrap();
        assert!((a - b).abs() <= 1e-8 * a);
    }

    #[test]
    fn degenerate_cross_polytope_is_flagged() {
        let p = CrossPolytope::new(vec![Vector::from(vec![1.0, 0.0]), Vector::from(vec![2.0, 0.0])]).unwrap();
        assert!(p.is_degenerate());
        assert_eq!(p.membership_scale(&Vector::from(vec![0.0, 1.0])).unwrap(), f64::INFINITY);
        assert!((p.membership_scale(&Vector::from(vec![1.0, 0.0])).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inradius_of_cross_polytope() {
        let p = GluskinPolytope::from_matrix(Matrix::identity(2)).unwrap();
        let diag = Vector::from(vec![1.0, 1.0]).scaled(1.0 / 2f64.sqrt());
        assert!(inradius_upper(&p, &[Vector::basis(2, 0), diag]).unwrap() <= 0.5f64.sqrt() + 1e-12);
        let (lo, hi) = inradius_bounds(&p, 4000, Seed::new(4)).unwrap();
        // direct minimization of max(|u1|, |u2|) over the circle gives 1/√2
        assert!(lo <= 0.5f64.sqrt() + 1e-12);
        assert!(hi >= 0.5f64.sqrt() - 1e-12 && hi - 0.5f64.sqrt() < 1e-3);
        let p4 = GluskinPolytope::from_matrix(Matrix::identity(4)).unwrap();
        let coarse = inradius_bounds(&p4, 100, Seed::new(5)).unwrap().1;
        let fine = inradius_bounds(&p4, 100_000, Seed::new(5)).unwrap().1;
        assert!(fine <= coarse && fine - 0.5 < 0.05 && fine >= 0.5 - 1e-12);
    }

    #[test]
    fn inradius_bounds_are_ordered() {
        for t in 0..100 {
            let p = sample_gluskin(10, 1000, Seed::with_stream(6, t)).unwrap();
            let (lo, hi) = inradius_bounds(&p, 10_000, Seed::with_stream(7, t)).unwrap();
            assert!(lo <= hi, "trial {t}: {lo} > {hi}");
        }
    }

    #[test]
    fn inradius_upper_is_monotone_in_direction_count() {
        let p = sample_gluskin(5, 40, Seed::new(9)).unwrap();
        let mut last = f64::INFINITY;
        for count in [10, 100, 1000] {
            let u = inradius_bounds(&p, count, Seed::new(10)).unwrap().1;
            assert!(u <= last);
            last = u;
        }
    }

    #[test]
    fn degenerate_gluskin_is_rejected() {
        let p = GluskinPolytope::from_matrix(Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap()).unwrap();
        assert_eq!(inradius_bounds(&p, 10, Seed::new(0)).unwrap_err(), Error::Degenerate);
    }

    fn column(m: usize, vals: &[(usize, f64)]) -> CoefficientMatrix {
        let mut a = Matrix::zeros(m, 1);
        for &(i, v) in vals {
            a.set(i, 0, v);
        }
        CoefficientMatrix::with_support_limit(a, m).unwrap()
    }

    #[test]
    fn class_is_enforced() {
        assert!(CoefficientMatrix::new(Matrix::from_row_major(2, 1, vec![0.7, 0.7]).unwrap()).is_err());
        assert!(CoefficientMatrix::new(Matrix::from_row_major(3, 1, vec![0.1, 0.1, 0.1]).unwrap()).is_err());
    }

    #[test]
    fn net_rounding_rules() {
        let a = column(2, &[(0, 0.26), (1, -0.26)]);
        let r = round_to_net(&a, 0.1).unwrap();
        assert_eq!(r.entries().get(0, 0), 0.2);
        assert_eq!(r.entries().get(1, 0), -0.2);
        let on_grid = column(2, &[(0, 3.0 * 0.125), (1, -2.0 * 0.125)]);
        assert_eq!(round_to_net(&on_grid, 0.125).unwrap(), on_grid);
        assert!(round_to_net(&a, 0.0).is_err());
        assert!(round_to_net(&a, 0.6).is_err());
    }

    #[test]
    fn net_rounding_properties() {
        for t in 0..1000 {
            let a = CoefficientMatrix::random(12, 5, Seed::with_stream(11, t));
            let eps = [0.5, 0.1, 1.0 / 3.0, 1e-3, 1.0 / 125.0][t as usize % 5];
            let r = round_to_net(&a, eps).unwrap();
            for (x, y) in a.entries().as_slice().iter().zip(r.entries().as_slice()) {
                assert!((x - y).abs() < eps);
                assert!(y.abs() <= x.abs());
                assert!(*x != 0.0 || *y == 0.0);
                let k = y / eps;
                assert!((k - libm::round(k)).abs() < 1e-9);
            }
            assert_eq!(round_to_net(&r, eps).unwrap(), r);
        }
    }

    #[test]
    fn alpha_split_threshold() {
        let a = column(5, &[(0, 0.5), (1, 0.3), (2, 0.2)]);
        let s = decompose_alpha(&a, 0.25).unwrap();
        assert_eq!(s.f1.entries().col(0).into_inner(), vec![0.5, 0.3, 0.0, 0.0, 0.0]);
        assert_eq!(s.f2.entries().col(0).into_inner(), vec![0.0, 0.0, 0.2, 0.0, 0.0]);
        let s = decompose_alpha(&a, 0.2).unwrap();
        assert!(s.f2.entries().max_abs() == 0.0);
        assert!(decompose_alpha(&a, 0.75).is_err());
    }

    #[test]
    fn alpha_split_properties() {
        for t in 0..1000u64 {
            let a = CoefficientMatrix::random(60, 6, Seed::with_stream(12, t));
            let alpha = 0.05 * (1 + t % 10) as f64;
            let s = decompose_alpha(&a, alpha).unwrap();
            for j in 0..6 {
                let c1 = s.f1.entries().col(j);
                let c2 = s.f2.entries().col(j);
                for i in 0..60 {
                    assert_eq!(c1[i] + c2[i], a.entries().get(i, j));
                    assert!(c1[i] == 0.0 || c2[i] == 0.0);
                    assert_eq!(s.f.entries().get(i, j), c1[i]);
                    assert_eq!(s.f.entries().get(i, 6 + j), c2[i]);
                }
                let supp = c1.iter().filter(|x| **x != 0.0).count() as f64;
                assert!(supp <= 1.0 / alpha);
                assert!(c2.norm2() <= alpha.sqrt());
            }
        }
    }

    #[test]
    fn inclusion_scale() {
        let gamma = crate::sampling::sample_gaussian_matrix(4, 12, Seed::new(13));
        let zero = CoefficientMatrix::new(Matrix::zeros(12, 4)).unwrap();
        assert_eq!(verify_decomposition_inclusion(&zero, 0.25, &gamma).unwrap(), 0.0);
        for t in 0..50 {
            let a = CoefficientMatrix::random(12, 4, Seed::with_stream(14, t));
            let d = verify_decomposition_inclusion(&a, 0.2, &gamma).unwrap();
            assert!(d <= 2.0 + 1e-9);
            // tiny alpha sends every entry to F₁, so F contains A itself
            let d1 = verify_decomposition_inclusion(&a, 1e-9, &gamma).unwrap();
            assert!(d1 <= 1.0 + 1e-9);
        }
    }

    fn ln_big(x: &BigUint) -> f64 {
        let bits = x.bits();
        let shift = bits.saturating_sub(64);
        let top: BigUint = x >> shift;
        let top = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
        top.ln() + shift as f64 * core::f64::consts::LN_2
    }

    #[test]
    fn net_bound_values() {
        // direct formula: 1·(ln C(1,1) + 1·ln 9)
        assert!((net_cardinality_log_bound(1, 1, 1.0 / 3.0) - 9f64.ln()).abs() < 1e-12);
        let (n, m) = (20usize, 8000usize);
        let eps = 1.0 / 8000.0;
        let mut binom = BigUint::from(1u32);
        for i in 0..n {
            binom = binom * BigUint::from((m - i) as u64) / BigUint::from((i + 1) as u64);
        }
        let inner = binom * BigUint::from(24_000u64).pow(n as u32);
        let oracle = ln_big(&inner.pow(n as u32));
        let ours = net_cardinality_log_bound(n, m, eps);
        assert!(ours > 0.0 && ours.is_finite());
        assert!((ours - oracle).abs() <= 1e-10 * oracle, "{ours} vs {oracle}");
        assert!(net_cardinality_log_bound(n, m + 1, eps) > ours);
        assert!(net_cardinality_log_bound(n, m, eps / 2.0) > ours);
    }

    #[test]
    fn tp_bound_endpoints() {
        let (n, m, eps) = (6usize, 216usize, 1.0 / 216.0);
        assert!((tp_prime_log_bound(n, m, eps, 0.25, 0) - net_cardinality_log_bound(n, m, eps)).abs() < 1e-9);
        let p_all = tp_prime_log_bound(n, m, eps, 0.25, n);
        let per = ln_binomial(216.0, 4.0) + 4.0 * (3.0 / eps).ln();
        assert!((p_all - 6.0 * per).abs() < 1e-9);
    }

    #[test]
    fn crosspol_orthonormal_is_not_member() {
        let p = CrossPolytope::standard(5);
        for k in 1..=5 {
            let v = crosspol_membership(&p, k, 0.9, CrosspolMode::Exact).unwrap();
            assert_eq!(v.member, Membership::No);
            assert_eq!(v.worst_count, 0);
            let v = crosspol_membership(&p, k, 0.9, CrosspolMode::heuristic(Seed::new(1))).unwrap();
            assert_eq!(v.member, Membership::No);
        }
    }

    #[test]
    fn crosspol_clustered_is_member() {
        let (n, h) = (6usize, 0.5);
        let mut gens = vec![Vector::basis(n, 0)];
        for i in 1..n {
            let mut x = Vector::basis(n, 0);
            x.axpy(h / 2.0, &Vector::basis(n, i));
            gens.push(x);
        }
        let p = CrossPolytope::new(gens).unwrap();
        let v = crosspol_membership(&p, n, h, CrosspolMode::Exact).unwrap();
        assert_eq!(v.member, Membership::Yes);
        assert_eq!(crosspol_count(&p, &v.witness_permutation, n, h), v.worst_count);
    }

    #[test]
    fn crosspol_exact_limits() {
        let p = CrossPolytope::standard(9);
        assert!(matches!(crosspol_membership(&p, 3, 1.0, CrosspolMode::Exact), Err(Error::TooLarge(_))));
        assert!(crosspol_membership(&p, 0, 1.0, CrosspolMode::heuristic(Seed::new(0))).is_err());
    }

    /// Oracle: literal enumeration of all n! orders.
    fn brute_force_worst(p: &CrossPolytope, k: usize, h: f64) -> usize {
        fn rec(p: &CrossPolytope, k: usize, h: f64, order: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut usize) {
            let n = p.n();
            if order.len() == n {
                *best = (*best).min(crosspol_count(p, order, k, h));
                return;
            }
            for v in 0..n {
                if !used[v] {
                    used[v] = true;
                    order.push(v);
                    rec(p, k, h, order, used, best);
                    order.pop();
                    used[v] = false;
                }
            }
        }
        let mut best = usize::MAX;
        rec(p, k, h, &mut Vec::new(), &mut vec![false; p.n()], &mut best);
        best
    }

    #[test]
    fn exact_mode_matches_enumeration() {
        let mut s = GaussianStream::new(Seed::new(15));
        for t in 0..20 {
            let n = 3 + t % 4;
            let p = random_cross(&mut s, n);
            let k = 1 + t % n;
            let h = 0.8 + 0.1 * t as f64;
            let v = crosspol_membership(&p, k, h, CrosspolMode::Exact).unwrap();
            assert_eq!(v.worst_count, brute_force_worst(&p, k, h));
            assert_eq!(crosspol_count(&p, &v.witness_permutation, k, h), v.worst_count);
        }
    }

    #[test]
    fn heuristic_tracks_exact() {
        let mut s = GaussianStream::new(Seed::new(16));
        let mut equal = 0;
        for t in 0..100 {
            let p = random_cross(&mut s, 6);
            let (k, h) = (6, 1.2);
            let exact = crosspol_membership(&p, k, h, CrosspolMode::Exact).unwrap();
            let heur = crosspol_membership(&p, k, h, CrosspolMode::heuristic(Seed::new(t))).unwrap();
            assert!(heur.worst_count >= exact.worst_count);
            assert_eq!(crosspol_count(&p, &heur.witness_permutation, k, h), heur.worst_count);
            if heur.member == Membership::No {
                assert!(4 * heur.worst_count < k);
            }
            equal += usize::from(heur.worst_count == exact.worst_count);
        }
        assert!(equal >= 80, "{equal}/100");
    }

    #[test]
    fn crosspol_invariant_under_relabeling() {
        let mut s = GaussianStream::new(Seed::new(17));
        for t in 0..30 {
            let p = random_cross(&mut s, 6);
            let mut perm: Vec<usize> = (0..6).collect();
            s.shuffle(&mut perm);
            let q = CrossPolytope::new(
                perm.iter().enumerate().map(|(i, &j)| p.generators()[j].scaled(if i % 2 == 0 { -1.0 } else { 1.0 })).collect(),
            )
            .unwrap();
            for mode in [CrosspolMode::Exact, CrosspolMode::heuristic(Seed::new(t))] {
                let a = crosspol_membership(&p, 4, 1.0, mode).unwrap();
                let b = crosspol_membership(&q, 4, 1.0, mode).unwrap();
                assert_eq!((a.member, a.worst_count), (b.member, b.worst_count));
            }
        }
    }

    #[test]
    fn tilt_arithmetic() {
        let p = CrossPolytope::standard(4);
        let t = tilt_rescale(&p, 2).unwrap();
        let norms: Vec<f64> = t.generators().iter().map(Vector::norm2).collect();
        assert_eq!(norms, vec![4.0, 4.0, 2.0, 2.0]);
        let all = tilt_rescale(&p, 4).unwrap();
        assert!(all.generators().iter().all(|g| g.norm2() == 4.0));
        assert!(tilt_rescale(&p, 5).is_err());
    }

    #[test]
    fn tilt_scales_tail_distances() {
        let mut s = GaussianStream::new(Seed::new(18));
        let (n, k) = (7, 3);
        let p = random_cross(&mut s, n);
        let before = p.sequential_distances();
        // distances of a tail vector to spans of preceding (rescaled) vectors
        let after = tilt_rescale(&p, k).unwrap().sequential_distances();
        for i in n - k..n {
            assert!((after[i] - before[i] * 4.0 * k as f64 / n as f64).abs() <= 1e-12 * before[i].max(1.0));
        }
        for i in 0..n - k {
            assert!((after[i] - 4.0 * before[i]).abs() <= 1e-12 * before[i].max(1.0));
        }
    }
}
