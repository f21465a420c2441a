//! Seeded frequency experiments for the probabilistic lemmas, the tilt
//! constant calibration, a Banach–Mazur upper bound search and a
//! small-scale run of the whole pipeline.
//!
//! Trial `i` of every harness draws from `seed.split(i)`, so records are
//! reproducible bit for bit under any worker count, and harnesses with a
//! monotone parameter see the same samples at every value of it.

use std::time::Instant;

use gluskin_core::linalg::{orthonormalize, smallest_singular_value, Matrix, Vector};
use gluskin_core::lp::l1_membership_scale;
use gluskin_core::measure::{crosspol2_bound, simple_bound, symmetrize, weighted_l1_measure, CalibrationConstants, MeasureEstimate};
use gluskin_core::polytope::{
    crosspol_membership, decompose_alpha, round_to_net, sequential_distances, verify_decomposition_inclusion, CoefficientMatrix,
    CrossPolytope, CrosspolMode, Membership,
};
use gluskin_core::rng::GaussianStream;
use gluskin_core::sampling::{sample_gaussian_matrix, GluskinPolytope};
use gluskin_core::{Error, Result, Seed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::parallel::{gaussian_measure_par, par_trials};
use crate::record::ExperimentRecord;

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg()))
    }
}

fn finish(mut r: ExperimentRecord, start: Instant) -> ExperimentRecord {
    r.wall_time = Some(start.elapsed().as_secs_f64());
    r
}

fn rate(successes: u64, trials: u64) -> f64 {
    successes as f64 / trials as f64
}

fn gaussian_vector(s: &mut GaussianStream, n: usize) -> Vector {
    let mut v = vec![0.0; n];
    s.fill_gaussian(&mut v);
    Vector::from(v)
}

/// Vectors `x_1..x_n` where `x_i` sits at distance exactly `dist[i]` from
/// the span of its predecessors when given, and is Gaussian otherwise.
pub fn construct_with_distances(n: usize, dist: &[Option<f64>], stream: &mut GaussianStream) -> Result<Vec<Vector>> {
    require(dist.len() == n, || format!("need {n} distances, got {}", dist.len()))?;
    let mut out: Vec<Vector> = Vec::with_capacity(n);
    for d in dist {
        let g = gaussian_vector(stream, n);
        let Some(d) = d else {
            out.push(g);
            continue;
        };
        let span = orthonormalize(&out, n)?;
        let mut w = span.residual(&g);
        w = w.scaled(1.0 / w.norm2());
        let mut base = Vector::zeros(n);
        for (j, x) in out.iter().enumerate() {
            base.axpy(stream.next_gaussian() / ((j + 1) as f64).sqrt(), x);
        }
        // keep the base inside the span exactly (up to rounding)
        let base = base.sub(&span.residual(&base));
        out.push(base.add(&w.scaled(*d)));
    }
    Ok(out)
}

fn columns_of(m: &Matrix, idx: &[usize]) -> Result<Matrix> {
    Matrix::from_columns(&idx.iter().map(|&j| m.col(j)).collect::<Vec<_>>())
}

// ---------------------------------------------------------------- span distance

#[derive(Debug, Clone)]
pub struct SpanDistance {
    pub n: usize,
    pub u: usize,
    pub k: usize,
    pub tau: f64,
    pub delta: f64,
    /// `m x u`, columns of Euclidean norm at most one.
    pub b: Matrix,
    pub trials: u64,
    /// Random orders checked per trial on top of the identity.
    pub permutations: usize,
    pub seed: Seed,
}

impl SpanDistance {
    /// `B` = the `u x u` identity, so the `H_i` are i.i.d. Gaussian.
    pub fn identity(n: usize, u: usize, k: usize, tau: f64, delta: f64, trials: u64, seed: Seed) -> Self {
        Self { n, u, k, tau, delta, b: Matrix::identity(u), trials, permutations: 0, seed }
    }

    fn validate(&self) -> Result<()> {
        let (n, u, k) = (self.n, self.u, self.k);
        require(2 * u >= n && u <= n, || format!("need n/2 <= u <= n, got n={n}, u={u}"))?;
        require(k >= 1 && 2 * k <= u, || format!("need 1 <= k <= u/2, got k={k}, u={u}"))?;
        require(self.delta * k as f64 >= 1.0 - 1e-12 && self.delta <= 1.0, || format!("need delta in [1/k, 1], got {}", self.delta))?;
        require(self.tau > 0.0, || format!("need tau > 0, got {}", self.tau))?;
        require(self.trials >= 1, || "need at least one trial".into())?;
        require(self.b.cols() == u && self.b.rows() >= u, || format!("B must be m x u with m >= u, got {}x{}", self.b.rows(), self.b.cols()))?;
        let cols = self.b.columns();
        require(cols.iter().all(|c| c.norm2() <= 1.0 + 1e-12), || "columns of B must have norm <= 1".into())?;
        require(orthonormalize(&cols, self.b.rows())?.rank() == u, || "B must have full column rank".into())
    }
}

/// Count of the last `k` positions within `threshold` of their predecessors.
fn tail_count(cols: &[Vector], order: &[usize], k: usize, threshold: f64) -> usize {
    let ordered: Vec<Vector> = order.iter().map(|&i| cols[i].clone()).collect();
    let d = sequential_distances(&ordered);
    d[d.len() - k..].iter().filter(|&&x| x <= threshold).count()
}

pub fn run_span_distance_experiment(cfg: &SpanDistance, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    cfg.validate()?;
    let (n, u, k) = (cfg.n, cfg.u, cfg.k);
    let threshold = cfg.tau * ((n - u + k) as f64).sqrt();
    let need = (1.0 - cfg.delta) * k as f64;
    let outcomes = par_trials(cfg.trials, cfg.seed, |_, s| {
        let gamma = sample_gaussian_matrix(n, cfg.b.rows(), s.split(0));
        let cols = gamma.mul(&cfg.b)?.columns();
        let mut order: Vec<usize> = (0..u).collect();
        let mut worst = tail_count(&cols, &order, k, threshold);
        let mut stream = GaussianStream::new(s.split(1));
        for _ in 0..cfg.permutations {
            stream.shuffle(&mut order);
            worst = worst.min(tail_count(&cols, &order, k, threshold));
        }
        Ok(worst)
    })?;
    let successes = outcomes.iter().filter(|&&c| c as f64 >= need).count() as u64;
    let mut r = ExperimentRecord::new("span-distance", cfg.seed, *constants)
        .param("n", n)
        .param("u", u)
        .param("k", k)
        .param("tau", cfg.tau)
        .param("delta", cfg.delta)
        .param("m", cfg.b.rows())
        .param("permutations", cfg.permutations);
    if cfg.b == Matrix::identity(u) {
        r = r.param("b", "identity");
    } else {
        r = r.param("b", &cfg.b);
    }
    r.trials = cfg.trials;
    r.empirical_rate = rate(successes, cfg.trials);
    let c = constants.span_lower.value;
    r.bound_value = -(-c * cfg.tau * cfg.tau * cfg.delta * (n - u + k) as f64 * k as f64).exp_m1();
    r.passed = r.empirical_rate >= r.bound_value;
    r.asserted = true;
    r.detail("successes", successes);
    r.detail("threshold", threshold);
    r.detail("min_count", outcomes.iter().min().copied().unwrap_or(0));
    Ok(finish(r, start))
}

// ---------------------------------------------------------------- discretization

#[derive(Debug, Clone, Copy)]
pub struct Discretization {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub rho: f64,
    pub trials: u64,
    pub seed: Seed,
}

impl Discretization {
    /// `m/ε <= n^10` and `ερn² <= 1`.
    pub fn regime_holds(&self) -> bool {
        let n = self.n as f64;
        self.eps > 0.0 && self.m as f64 / self.eps <= n.powi(10) && self.eps * self.rho * n * n <= 1.0 + 1e-12
    }
}

/// `ε·n·max_j |G_j|_2·ρ√m / s_min(Γᵀ)` for one sample.
pub fn discretization_slack(gamma: &Matrix, eps: f64, rho: f64) -> Result<f64> {
    let (n, m) = (gamma.rows(), gamma.cols());
    let max_norm = gamma.columns().iter().map(Vector::norm2).fold(0.0, f64::max);
    if eps == 0.0 {
        return Ok(0.0);
    }
    let s_min = smallest_singular_value(&gamma.transpose())?;
    Ok(eps * n as f64 * max_norm * rho * (m as f64).sqrt() / s_min)
}

pub fn run_discretization_slack(cfg: &Discretization, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    require(cfg.m >= cfg.n && cfg.n >= 2, || format!("need m >= n >= 2, got n={}, m={}", cfg.n, cfg.m))?;
    require(cfg.eps >= 0.0 && cfg.rho >= 0.0, || "eps and rho must be nonnegative".into())?;
    require(cfg.trials >= 1, || "need at least one trial".into())?;
    let slacks = par_trials(cfg.trials, cfg.seed, |_, s| discretization_slack(&sample_gaussian_matrix(cfg.n, cfg.m, s), cfg.eps, cfg.rho))?;
    let successes = slacks.iter().filter(|&&x| x <= 0.5).count() as u64;
    let regime = cfg.regime_holds();
    let mut r = ExperimentRecord::new("discretization", cfg.seed, *constants)
        .param("n", cfg.n)
        .param("m", cfg.m)
        .param("eps", cfg.eps)
        .param("rho", cfg.rho);
    r.trials = cfg.trials;
    r.empirical_rate = rate(successes, cfg.trials);
    r.bound_value = 0.99;
    r.passed = regime && r.empirical_rate >= r.bound_value;
    r.asserted = regime;
    r.detail("regime_holds", regime);
    r.detail("successes", successes);
    r.detail("max_slack", slacks.iter().copied().fold(0.0, f64::max));
    Ok(finish(r, start))
}

// ---------------------------------------------------------------- events E1, E2

/// Shared setup of the two column events: `A`, `α`, index sets
/// `I1 ⊂ [0, n)` and `I2 ⊂ [n, 2n)` (0-based columns of `F(A)`).
#[derive(Debug, Clone)]
pub struct ColumnEvent {
    pub alpha: f64,
    pub s_tilde: f64,
    pub a: CoefficientMatrix,
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    pub trials: u64,
    pub seed: Seed,
}

impl ColumnEvent {
    /// `I1 = {0..n−t}`, `I2 = {2n−t..2n}`: each column of `A` used once.
    pub fn split_sets(n: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
        ((0..n - t).collect(), (2 * n - t..2 * n).collect())
    }

    fn n(&self) -> usize {
        self.a.n()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        require(sorted(&self.i1) && sorted(&self.i2), || "index sets must be strictly increasing".into())?;
        require(self.i1.iter().all(|&i| i < n), || "I1 must lie in [0, n)".into())?;
        require(self.i2.iter().all(|&i| (n..2 * n).contains(&i)), || "I2 must lie in [n, 2n)".into())?;
        require(self.i1.len() + self.i2.len() == n, || format!("need |I1| + |I2| = n = {n}"))?;
        require(self.trials >= 1, || "need at least one trial".into())
    }

    fn selected(&self) -> Result<(Matrix, Vec<usize>)> {
        let split = decompose_alpha(&self.a, self.alpha)?;
        let idx: Vec<usize> = self.i1.iter().chain(&self.i2).copied().collect();
        Ok((columns_of(split.f.entries(), &idx)?, idx))
    }

    fn params(&self, r: ExperimentRecord) -> ExperimentRecord {
        r.param("n", self.n())
            .param("m", self.a.m())
            .param("alpha", self.alpha)
            .param("s_tilde", self.s_tilde)
            .param("i1", &self.i1)
            .param("i2", &self.i2)
            .param("a", self.a.entries())
    }
}

/// Columns of `Γ·F(A)` on `I`, or `None` if they are linearly dependent (the
/// events then hold vacuously).
fn event_columns(sub: &Matrix, seed: Seed) -> Result<Option<Vec<Vector>>> {
    let n = sub.cols();
    let gamma = sample_gaussian_matrix(n, sub.rows(), seed);
    let cols = gamma.mul(sub)?.columns();
    Ok((orthonormalize(&cols, n)?.rank() == n).then_some(cols))
}

pub fn run_event_e2_experiment(ev: &ColumnEvent, delta: f64, tau: f64, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    ev.validate()?;
    require(ev.i2.len() as f64 > ev.s_tilde, || format!("need |I2| > s_tilde, got {} <= {}", ev.i2.len(), ev.s_tilde))?;
    require((0.0..=1.0).contains(&delta) && tau >= 0.0, || "need delta in [0, 1] and tau >= 0".into())?;
    let (sub, _) = ev.selected()?;
    let t = ev.i2.len();
    let p = ev.i1.len();
    let threshold = tau * (ev.alpha * t as f64).sqrt();
    let outcomes = par_trials(ev.trials, ev.seed, |_, s| {
        Ok(match event_columns(&sub, s)? {
            None => (true, true),
            Some(cols) => {
                let d = sequential_distances(&cols);
                let count = d[p..].iter().filter(|&&x| x <= threshold).count();
                (count as f64 >= (1.0 - delta) * t as f64, false)
            }
        })
    })?;
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let mut r = ev.params(ExperimentRecord::new("event-e2", ev.seed, *constants)).param("delta", delta).param("tau", tau);
    r.trials = ev.trials;
    r.empirical_rate = rate(successes, ev.trials);
    r.bound_value = 1.0 - 1.0 / ev.n() as f64;
    r.passed = r.empirical_rate >= r.bound_value;
    r.detail("successes", successes);
    r.detail("vacuous", outcomes.iter().filter(|o| o.1).count());
    r.detail("threshold", threshold);
    Ok(finish(r, start))
}

pub fn run_event_e1_experiment(ev: &ColumnEvent, s: usize, h: f64, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    ev.validate()?;
    let n = ev.n();
    require(ev.i1.len() as f64 >= n as f64 - ev.s_tilde, || format!("need |I1| >= n - s_tilde, got {}", ev.i1.len()))?;
    require(s >= 1 && s <= n && h >= 0.0, || format!("need 1 <= s <= n and h >= 0, got s={s}, h={h}"))?;
    let (sub, _) = ev.selected()?;
    let outcomes = par_trials(ev.trials, ev.seed, |_, seed| {
        Ok(match event_columns(&sub, seed.split(0))? {
            None => (true, true),
            Some(cols) => {
                let mode = if n <= 8 { CrosspolMode::Exact } else { CrosspolMode::heuristic(seed.split(1)) };
                let v = crosspol_membership(&CrossPolytope::new(cols)?, s, h, mode)?;
                (v.member != Membership::No, false)
            }
        })
    })?;
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let mut r = ev.params(ExperimentRecord::new("event-e1", ev.seed, *constants)).param("s", s).param("h", h);
    r.trials = ev.trials;
    r.empirical_rate = rate(successes, ev.trials);
    r.bound_value = 1.0 - 1.0 / n as f64;
    r.passed = r.empirical_rate >= r.bound_value;
    r.detail("successes", successes);
    r.detail("vacuous", outcomes.iter().filter(|o| o.1).count());
    r.detail("mode", if n <= 8 { "exact" } else { "heuristic" });
    Ok(finish(r, start))
}

// ---------------------------------------------------------------- measure bounds

#[derive(Debug, Clone, Copy, Serialize)]
struct BoundPoint {
    estimate: f64,
    ci_high: f64,
}

/// Upper-bound protocol shared by the two distance lemmas: build
/// `polytopes` cross-polytopes meeting the hypothesis, estimate each
/// measure and count upper CIs above `bound + 1e-3`.
fn bound_protocol(
    name: &str,
    n: usize,
    polytopes: u64,
    samples: u64,
    seed: Seed,
    bound: f64,
    constants: &CalibrationConstants,
    dists: impl Fn(&mut GaussianStream) -> Vec<Option<f64>> + Sync,
) -> Result<ExperimentRecord> {
    let start = Instant::now();
    require(polytopes >= 1, || "need at least one polytope".into())?;
    let points = par_trials(polytopes, seed, |_, s| {
        let mut stream = GaussianStream::new(s.split(0));
        let d = dists(&mut stream);
        let p = CrossPolytope::new(construct_with_distances(n, &d, &mut stream)?)?;
        let e = gaussian_measure_par(&p, 1.0, samples, s.split(1))?;
        Ok(BoundPoint { estimate: e.estimate, ci_high: e.ci_high })
    })?;
    let violations = points.iter().filter(|p| p.ci_high > bound + 1e-3).count() as u64;
    let mut r = ExperimentRecord::new(name, seed, *constants).param("n", n).param("polytopes", polytopes).param("samples", samples);
    r.trials = polytopes;
    r.empirical_rate = rate(polytopes - violations, polytopes);
    r.bound_value = 1.0;
    r.passed = violations == 0;
    r.asserted = true;
    r.detail("bound", bound);
    r.detail("violations", violations);
    r.detail("max_ci_high", points.iter().map(|p| p.ci_high).fold(0.0, f64::max));
    r.detail("estimates", points.iter().map(|p| p.estimate).collect::<Vec<_>>());
    Ok(finish(r, start))
}

/// Cross-polytopes with `dist(x_i, span{x_j : j < i}) = h` for `i > r`,
/// checked against `(eh/(n−r))^{n−r}`.
pub fn run_simple_bound_experiment(n: usize, r: usize, h: f64, polytopes: u64, samples: u64, seed: Seed, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let bound = simple_bound(n, r, h)?;
    let rec = bound_protocol("simple-bound", n, polytopes, samples, seed, bound, constants, |_| (0..n).map(|i| (i >= r).then_some(h)).collect())?;
    Ok(rec.param("r", r).param("h", h))
}

/// `⌈(1−δ)k⌉` randomly placed positions among the last `k` sit at distance
/// `h`; checked against `(2eh/k)^{(1−δ)k}`.
pub fn run_crosspol2_experiment(
    n: usize,
    k: usize,
    h: f64,
    delta: f64,
    polytopes: u64,
    samples: u64,
    seed: Seed,
    constants: &CalibrationConstants,
) -> Result<ExperimentRecord> {
    require(k >= 1 && k <= n, || format!("need 1 <= k <= n, got k={k}"))?;
    let bound = crosspol2_bound(k, h, delta)?;
    let close = ((1.0 - delta) * k as f64).ceil() as usize;
    let rec = bound_protocol("crosspol2", n, polytopes, samples, seed, bound, constants, |s| {
        let mut tail: Vec<usize> = (n - k..n).collect();
        s.shuffle(&mut tail);
        let mut d = vec![None; n];
        for &i in &tail[..close] {
            d[i] = Some(h);
        }
        d
    })?;
    Ok(rec.param("k", k).param("h", h).param("delta", delta))
}

/// Random Gaussian cross-polytopes against their symmetrization at a random
/// `r`, on shared samples: `MC(sym) >= MC(P) − 3(w_P + w_sym)`.
pub fn run_symmetrization_experiment(n: usize, instances: u64, samples: u64, seed: Seed, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    require(n >= 1 && instances >= 1, || "need n >= 1 and at least one instance".into())?;
    let margins = par_trials(instances, seed, |_, s| {
        let mut stream = GaussianStream::new(s.split(0));
        let p = CrossPolytope::new((0..n).map(|_| gaussian_vector(&mut stream, n)).collect())?;
        let r = 1 + stream.next_below(n as u64) as usize;
        let q = symmetrize(&p, r)?;
        let a = gaussian_measure_par(&p, 1.0, samples, s.split(1))?;
        let b = gaussian_measure_par(&q, 1.0, samples, s.split(1))?;
        Ok(b.estimate - a.estimate + 3.0 * (a.ci_width() + b.ci_width()))
    })?;
    let violations = margins.iter().filter(|&&x| x < 0.0).count() as u64;
    let mut r = ExperimentRecord::new("symmetrization", seed, *constants).param("n", n).param("instances", instances).param("samples", samples);
    r.trials = instances;
    r.empirical_rate = rate(instances - violations, instances);
    r.bound_value = 1.0;
    r.passed = violations == 0;
    r.asserted = true;
    r.detail("violations", violations);
    r.detail("min_margin", margins.iter().copied().fold(f64::INFINITY, f64::min));
    Ok(finish(r, start))
}

/// Identity checks of the α-split for random `A ∈ M_{m,n}`, random
/// `α ∈ (0, 1/2]` and Gaussian `Γ`.
pub fn run_decomposition_experiment(n: usize, m: usize, instances: u64, seed: Seed, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    require(n >= 1 && m >= n && instances >= 1, || format!("need m >= n >= 1, got n={n}, m={m}"))?;
    let worst = par_trials(instances, seed, |_, s| {
        let a = CoefficientMatrix::random(m, n, s.split(0));
        let alpha = 0.5 * (1.0 - GaussianStream::new(s.split(1)).next_uniform());
        let split = decompose_alpha(&a, alpha)?;
        let (e, f1, f2) = (a.entries(), split.f1.entries(), split.f2.entries());
        let mut ok = true;
        for j in 0..n {
            let mut support = 0usize;
            for i in 0..m {
                let (x, y) = (f1.get(i, j), f2.get(i, j));
                ok &= x + y == e.get(i, j) && (x == 0.0 || y == 0.0);
                support += usize::from(x != 0.0);
            }
            ok &= support as f64 <= 1.0 / alpha;
            ok &= f2.col(j).norm2() <= alpha.sqrt() * (1.0 + 1e-12);
        }
        let gamma = sample_gaussian_matrix(n, m, s.split(2));
        let scale = verify_decomposition_inclusion(&a, alpha, &gamma)?;
        ok &= scale <= 2.0 + 1e-9;
        Ok((ok, scale))
    })?;
    let failures = worst.iter().filter(|w| !w.0).count() as u64;
    let mut r = ExperimentRecord::new("decomposition", seed, *constants).param("n", n).param("m", m).param("instances", instances);
    r.trials = instances;
    r.empirical_rate = rate(instances - failures, instances);
    r.bound_value = 1.0;
    r.passed = failures == 0;
    r.asserted = true;
    r.detail("failures", failures);
    r.detail("max_inclusion_scale", worst.iter().map(|w| w.1).fold(0.0, f64::max));
    Ok(finish(r, start))
}

// ---------------------------------------------------------------- calibration

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationPoint {
    pub n: usize,
    pub k: usize,
    pub estimate: f64,
    pub ci_high: f64,
    pub oracle: f64,
    /// `(log 2 − log ci_high)/k`.
    pub c_bound: f64,
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub constants: CalibrationConstants,
    /// Largest `c` with `2e^{−ck} >= ci_high` at every point.
    pub fitted: f64,
    /// The same fit on the exact measures.
    pub oracle_fit: f64,
    /// Least-squares slope of `log estimate` in `k`, per `n`.
    pub slopes: Vec<(usize, f64)>,
    pub oracle_slopes: Vec<(usize, f64)>,
    pub points: Vec<CalibrationPoint>,
    pub record: ExperimentRecord,
}

/// Axis-aligned member of `crosspol(k, 2n)`: `n − k` generators of norm
/// `2n` and `k` of norm `tail_norm`. Distances to spans equal the norms, so
/// every order counts all of its last `k`.
pub fn tilt_family(n: usize, k: usize, tail_norm: f64) -> Result<CrossPolytope> {
    require(k >= 1 && k <= n && tail_norm > 0.0, || format!("need 1 <= k <= n and tail_norm > 0, got n={n}, k={k}"))?;
    let head = 2.0 * n as f64;
    let norms: Vec<f64> = (0..n).map(|i| if i < n - k { head } else { tail_norm }).collect();
    CrossPolytope::axis_aligned(&norms)
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn calibrate_tilt_constant(
    n_list: &[usize],
    k_list: &[usize],
    tail_norm: f64,
    samples: u64,
    seed: Seed,
    base: &CalibrationConstants,
) -> Result<CalibrationOutcome> {
    let start = Instant::now();
    require(!n_list.is_empty() && !k_list.is_empty(), || "need at least one n and one k".into())?;
    let grid: Vec<(usize, usize)> = n_list.iter().flat_map(|&n| k_list.iter().map(move |&k| (n, k))).collect();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(n, k))| {
            let p = tilt_family(n, k, tail_norm)?;
            let weights: Vec<f64> = p.generators().iter().map(|g| 1.0 / g.norm2()).collect();
            let e: MeasureEstimate = gaussian_measure_par(&p, 1.0, samples, seed.split(i as u64))?;
            let oracle = weighted_l1_measure(&weights)?;
            let c_bound = (std::f64::consts::LN_2 - e.ci_high.ln()) / k as f64;
            Ok(CalibrationPoint { n, k, estimate: e.estimate, ci_high: e.ci_high, oracle, c_bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted = points.iter().map(|p| p.c_bound).fold(f64::INFINITY, f64::min);
    let oracle_fit = points.iter().map(|p| (std::f64::consts::LN_2 - p.oracle.ln()) / p.k as f64).fold(f64::INFINITY, f64::min);
    let slope_of = |f: fn(&CalibrationPoint) -> f64| -> Vec<(usize, f64)> {
        n_list
            .iter()
            .filter(|_| k_list.len() >= 2)
            .map(|&n| {
                let pts: Vec<&CalibrationPoint> = points.iter().filter(|p| p.n == n).collect();
                let xs: Vec<f64> = pts.iter().map(|p| p.k as f64).collect();
                let ys: Vec<f64> = pts.iter().map(|p| f(p).ln()).collect();
                (n, ls_slope(&xs, &ys))
            })
            .collect()
    };
    let slopes = slope_of(|p| p.estimate);
    let oracle_slopes = slope_of(|p| p.oracle);
    let constants = base.with_tilt_decay(fitted);
    let dominated = points.iter().all(|p| 2.0 * (-fitted * p.k as f64).exp() >= p.ci_high);
    let mut r = ExperimentRecord::new("calibrate", seed, constants)
        .param("n_list", n_list)
        .param("k_list", k_list)
        .param("tail_norm", tail_norm)
        .param("samples", samples);
    r.trials = points.len() as u64;
    r.empirical_rate = rate(points.iter().filter(|p| 2.0 * (-fitted * p.k as f64).exp() >= p.ci_high).count() as u64, points.len() as u64);
    r.bound_value = 1.0;
    r.passed = dominated && slopes.iter().all(|s| s.1 <= -fitted);
    r.asserted = true;
    r.detail("fitted_c", fitted);
    r.detail("oracle_fit_c", oracle_fit);
    r.detail("slopes", &slopes);
    r.detail("oracle_slopes", &oracle_slopes);
    r.detail("points", &points);
    let record = finish(r, start);
    Ok(CalibrationOutcome { constants, fitted, oracle_fit, slopes, oracle_slopes, points, record })
}

// ---------------------------------------------------------------- Banach–Mazur

#[derive(Debug, Clone, PartialEq)]
pub struct BmResult {
    /// `inner · outer`, an upper bound on `BM(P, B_1^n)`.
    pub d: f64,
    pub t: Matrix,
    /// Largest membership scale of `e_j` in `T(P)`.
    pub inner: f64,
    /// Largest `|T G_i|_1`.
    pub outer: f64,
    /// The step size fell below tolerance before `iters` sweeps ran out.
    pub converged: bool,
}

/// `(inner, outer)` for a given `T`: `B_1^n ⊂ inner·T(P)` and
/// `T(P) ⊂ outer·B_1^n`.
pub fn bm_factors(gamma: &Matrix, t: &Matrix) -> Result<(f64, f64)> {
    let gens = t.mul(gamma)?.columns();
    let outer = gens.iter().map(Vector::norm1).fold(0.0, f64::max);
    let n = t.rows();
    let mut inner: f64 = 0.0;
    for j in 0..n {
        inner = inner.max(l1_membership_scale(&Vector::basis(n, j), &gens)?.scale);
    }
    Ok((inner, outer))
}

/// Columns of `Γ` forming a locally volume-maximal basis: greedy pivoted
/// Gram–Schmidt, then exchanges while some coefficient exceeds one.
fn max_volume_basis(gamma: &Matrix) -> Result<Vec<usize>> {
    let (n, m) = (gamma.rows(), gamma.cols());
    let cols = gamma.columns();
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..n {
        let span = orthonormalize(&chosen.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>(), n)?;
        let best = (0..m)
            .filter(|i| !chosen.contains(i))
            .map(|i| (span.distance(&cols[i]), i))
            .fold((-1.0, 0), |a, b| if b.0 > a.0 { b } else { a });
        chosen.push(best.1);
    }
    for _ in 0..100 * n {
        let x = columns_of(gamma, &chosen)?;
        let coef = gluskin_core::linalg::LuFactor::new(&x)?;
        let mut worst = (1.0 + 1e-9, None);
        let mut out = vec![0.0; n];
        for i in (0..m).filter(|i| !chosen.contains(i)) {
            coef.solve_into(cols[i].as_slice(), &mut out);
            for (j, c) in out.iter().enumerate() {
                if c.abs() > worst.0 {
                    worst = (c.abs(), Some((j, i)));
                }
            }
        }
        match worst.1 {
            Some((j, i)) => chosen[j] = i,
            None => break,
        }
    }
    Ok(chosen)
}

fn invert(x: &Matrix) -> Result<Matrix> {
    let n = x.rows();
    let lu = gluskin_core::linalg::LuFactor::new(x)?;
    let cols = (0..n).map(|j| lu.solve(&Vector::basis(n, j))).collect::<Result<Vec<_>>>()?;
    Matrix::from_columns(&cols)
}

/// Coordinate descent on `T` from `restarts` starts (the first is the
/// inverse of a volume-maximal basis, the others random perturbations of
/// it). Step `0.25·max|T|`, halved after a sweep without improvement.
pub fn bm_upper_bound(p: &GluskinPolytope, restarts: usize, iters: usize, seed: Seed) -> Result<BmResult> {
    let gamma = p.gamma();
    let n = gamma.rows();
    require(gamma.cols() >= n && orthonormalize(&gamma.columns(), n)?.rank() == n, || "polytope must be full-dimensional".into())?;
    let t0 = invert(&columns_of(gamma, &max_volume_basis(gamma)?)?)?;
    let runs = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut t = t0.clone();
            if r > 0 {
                let mut s = GaussianStream::new(seed.split(r as u64));
                let mut z = Matrix::identity(n);
                for i in 0..n {
                    for j in 0..n {
                        z.set(i, j, z.get(i, j) + 0.2 * s.next_gaussian());
                    }
                }
                t = z.mul(&t0)?;
            }
            descend(gamma, t, iters)
        })
        .collect::<Vec<Result<BmResult>>>();
    let mut best: Option<BmResult> = None;
    for run in runs {
        let run = match run {
            Ok(r) => r,
            Err(Error::SingularMatrix) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().map_or(true, |b| run.d < b.d) {
            best = Some(run);
        }
    }
    best.ok_or(Error::Degenerate)
}

fn descend(gamma: &Matrix, mut t: Matrix, iters: usize) -> Result<BmResult> {
    let n = t.rows();
    let (mut inner, mut outer) = bm_factors(gamma, &t)?;
    let mut d = inner * outer;
    let mut step = 0.25;
    let mut converged = false;
    for _ in 0..iters {
        let scale = t.max_abs();
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                for sign in [1.0, -1.0] {
                    let old = t.get(i, j);
                    t.set(i, j, old + sign * step * scale);
                    let (a, b) = bm_factors(gamma, &t)?;
                    if a * b < d * (1.0 - 1e-12) {
                        (inner, outer, d) = (a, b, a * b);
                        improved = true;
                        break;
                    }
                    t.set(i, j, old);
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < 1e-6 {
                converged = true;
                break;
            }
        }
    }
    Ok(BmResult { d, t, inner, outer, converged })
}

// ---------------------------------------------------------------- pipeline

#[derive(Debug, Clone, Copy)]
pub struct PipelineMicro {
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub matrices: usize,
    pub samples: u64,
    pub seed: Seed,
    /// Selects the `G̃` stream; `Γ` and the matrices depend on `seed` only.
    pub draw: u64,
}

/// `m = n³`, `ε = n⁻³`. For each of `matrices` random `A`: round to the net,
/// split at `α`, and estimate `P{G̃ ∈ 4ρ·conv{±col_i(Γ F(A))}}`. A point
/// lies in some `n`-column sub-cross-polytope iff it lies in the hull of all
/// `2n` columns, so one ℓ1 membership scale decides the union event.
pub fn run_theorem_pipeline_micro(cfg: &PipelineMicro, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let n = cfg.n;
    require((2..=10).contains(&n), || format!("pipeline needs 2 <= n <= 10, got {n}"))?;
    require(cfg.rho > 0.0 && cfg.matrices >= 1, || "need rho > 0 and at least one matrix".into())?;
    let m = n * n * n;
    let eps = 1.0 / m as f64;
    let gamma = sample_gaussian_matrix(n, m, cfg.seed.split(0));
    let mut estimates = Vec::new();
    let mut inclusions = Vec::new();
    let mut ci_high = Vec::new();
    for i in 0..cfg.matrices {
        let a = CoefficientMatrix::random(m, n, cfg.seed.split(1).split(i as u64));
        let net = round_to_net(&a, eps)?;
        let split = decompose_alpha(&net, cfg.alpha)?;
        inclusions.push(verify_decomposition_inclusion(&net, cfg.alpha, &gamma)?);
        let gens: Vec<Vector> = gamma.mul(split.f.entries())?.columns().into_iter().filter(|c| c.norm2() > 0.0).collect();
        let sample_seed = cfg.seed.split(2 + cfg.draw).split(i as u64);
        let e = if gens.is_empty() {
            MeasureEstimate::from_counts(0, cfg.samples, sample_seed)?
        } else {
            let body = GluskinPolytope::from_matrix(Matrix::from_columns(&gens)?)?;
            gaussian_measure_par(&body, 4.0 * cfg.rho, cfg.samples, sample_seed)?
        };
        estimates.push(e.estimate);
        ci_high.push(e.ci_high);
    }
    let worst = estimates.iter().copied().fold(0.0, f64::max);
    let mut r = ExperimentRecord::new("pipeline", cfg.seed, *constants)
        .param("n", n)
        .param("alpha", cfg.alpha)
        .param("rho", cfg.rho)
        .param("matrices", cfg.matrices)
        .param("samples", cfg.samples)
        .param("draw", cfg.draw);
    r.trials = cfg.samples;
    r.empirical_rate = worst;
    r.bound_value = 0.5;
    r.passed = worst <= 0.5;
    r.detail("m", m);
    r.detail("estimates", &estimates);
    r.detail("ci_high", &ci_high);
    r.detail("inclusion_scales", &inclusions);
    Ok(finish(r, start))
}

// ---------------------------------------------------------------- single measure

/// Bodies the `measure` command knows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `h·B_1^n`, with the quadrature oracle.
    L1Ball { n: usize, h: f64 },
    /// `ρ·conv{±G_i}` for a fresh sample.
    Gluskin { n: usize, m: usize, rho: f64 },
    /// The calibration family at `(n, k)`.
    Tilt { n: usize, k: usize, tail_norm: f64 },
}

pub fn run_measure(family: Family, samples: u64, seed: Seed, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let (name, e, oracle) = match family {
        Family::L1Ball { n, h } => {
            let e = gaussian_measure_par(&CrossPolytope::standard(n), h, samples, seed)?;
            ("measure-l1ball", e, Some(gluskin_core::measure::l1_ball_measure_oracle(n, h)?))
        }
        Family::Gluskin { n, m, rho } => {
            let p = gluskin_core::sampling::sample_gluskin(n, m, seed.split(0))?;
            ("measure-gluskin", gaussian_measure_par(&p, rho, samples, seed.split(1))?, None)
        }
        Family::Tilt { n, k, tail_norm } => {
            let p = tilt_family(n, k, tail_norm)?;
            let w: Vec<f64> = p.generators().iter().map(|g| 1.0 / g.norm2()).collect();
            ("measure-tilt", gaussian_measure_par(&p, 1.0, samples, seed)?, Some(weighted_l1_measure(&w)?))
        }
    };
    let mut r = ExperimentRecord::new(name, seed, *constants).param("samples", samples);
    r = match family {
        Family::L1Ball { n, h } => r.param("n", n).param("h", h),
        Family::Gluskin { n, m, rho } => r.param("n", n).param("m", m).param("rho", rho),
        Family::Tilt { n, k, tail_norm } => r.param("n", n).param("k", k).param("tail_norm", tail_norm),
    };
    r.trials = samples;
    r.empirical_rate = e.estimate;
    r.bound_value = oracle.unwrap_or(f64::NAN);
    r.passed = oracle.map_or(true, |o| e.ci_low <= o && o <= e.ci_high);
    r.detail("successes", e.successes);
    r.detail("ci_low", e.ci_low);
    r.detail("ci_high", e.ci_high);
    r.detail("degenerate", e.degenerate);
    Ok(finish(r, start))
}

/// Summary statistics of one Gluskin sample, optionally with a BM search.
pub fn run_sample(n: usize, m: usize, directions: usize, bm: Option<(usize, usize)>, seed: Seed, constants: &CalibrationConstants) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let p = gluskin_core::sampling::sample_gluskin(n, m, seed)?;
    let g = p.gamma();
    let max_norm = g.columns().iter().map(Vector::norm2).fold(0.0, f64::max);
    let s_min = smallest_singular_value(&g.transpose())?;
    let mut r = ExperimentRecord::new("sample", seed, *constants).param("n", n).param("m", m).param("directions", directions);
    r.detail("max_column_norm", max_norm);
    r.detail("s_min", s_min);
    if m >= n && directions > 0 {
        let (lo, hi) = gluskin_core::polytope::inradius_bounds(&p, directions, seed.split(1))?;
        r.detail("inradius_lower", lo);
        r.detail("inradius_upper", hi);
    }
    if let Some((restarts, iters)) = bm {
        let b = bm_upper_bound(&p, restarts, iters, seed.split(2))?;
        r = r.param("bm_restarts", restarts).param("bm_iters", iters);
        r.detail("bm_upper", b.d);
        r.detail("bm_converged", b.converged);
        r.detail("bm_t", json!(b.t));
    }
    r.trials = 1;
    r.empirical_rate = f64::NAN;
    r.passed = true;
    Ok(finish(r, start))
}
