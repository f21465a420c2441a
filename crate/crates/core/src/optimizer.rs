//! The asymptotic parameter system: closed forms for `τ`, `α`, `ρ`, the
//! constraint set, the binomial tail sums and the search for the largest
//! admissible `ρ`.
//!
//! Everything is carried as natural logarithms, with `L = log n`, so `n` may
//! be astronomically large. `m = n³`, `ε = n⁻³` and `δ = 1/log n` are fixed
//! by `L`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measure::CalibrationConstants;
use crate::stats::{ln_binomial, log_add_exp, log_sum_exp};

const LN_2: f64 = core::f64::consts::LN_2;

/// Which term of the three-way minimum defines `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RhoBranch {
    /// `n/√s`
    Sparse,
    /// `s̃³/(log n · n^{5/2} √α)`
    Alpha,
    /// `s̃^{7/2}/(log n · n^{5/2})`
    Dense,
}

impl RhoBranch {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sparse => "sparse",
            Self::Alpha => "alpha",
            Self::Dense => "dense",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterSet {
    pub log_n: f64,
    pub delta: f64,
    pub log_s: f64,
    pub log_s_tilde: f64,
    pub log_tau: f64,
    pub log_alpha: f64,
    pub log_rho: f64,
    pub rho_branch: RhoBranch,
    pub constants: CalibrationConstants,
}

fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// `log α` for `α = C'·n·log n / s̃²`.
pub fn alpha_formula(log_n: f64, log_s_tilde: f64, c: &CalibrationConstants) -> f64 {
    ln(c.alpha_scale.value) + log_n + ln(log_n) - 2.0 * log_s_tilde
}

/// `log τ` for `τ = √C_p1 · log n · max(√(n/s̃), √(n/(s̃²α)))`.
pub fn tau_formula(log_n: f64, log_s_tilde: f64, log_alpha: f64, c: &CalibrationConstants) -> f64 {
    let a = 0.5 * (log_n - log_s_tilde);
    let b = 0.5 * (log_n - 2.0 * log_s_tilde - log_alpha);
    0.5 * ln(c.e2_union.value) + ln(log_n) + a.max(b)
}

/// `log ρ` for `ρ = c'·min(n/√s, s̃³/(log n·n^{5/2}√α), s̃^{7/2}/(log n·n^{5/2}))`.
pub fn rho_formula(log_n: f64, log_s: f64, log_s_tilde: f64, log_alpha: f64, c: &CalibrationConstants) -> (f64, RhoBranch) {
    let ll = ln(log_n);
    let branches = [
        (log_n - 0.5 * log_s, RhoBranch::Sparse),
        (3.0 * log_s_tilde - ll - 2.5 * log_n - 0.5 * log_alpha, RhoBranch::Alpha),
        (3.5 * log_s_tilde - ll - 2.5 * log_n, RhoBranch::Dense),
    ];
    let (v, b) = branches.iter().copied().fold((f64::INFINITY, RhoBranch::Sparse), |acc, x| if x.0 < acc.0 { x } else { acc });
    (ln(c.rho_scale.value) + v, b)
}

impl ParameterSet {
    /// Parameters with explicit `s`, `s̃`, `α`; `τ` and `ρ` from their formulas.
    pub fn with_values(log_n: f64, log_s: f64, log_s_tilde: f64, log_alpha: f64, constants: CalibrationConstants) -> Result<Self> {
        if !(log_n > 1.0) || !log_n.is_finite() {
            return Err(Error::InvalidParameters(alloc::format!("need log n > 1, got {log_n}")));
        }
        let log_tau = tau_formula(log_n, log_s_tilde, log_alpha, &constants);
        let (log_rho, rho_branch) = rho_formula(log_n, log_s, log_s_tilde, log_alpha, &constants);
        let p = Self { log_n, delta: 1.0 / log_n, log_s, log_s_tilde, log_tau, log_alpha, log_rho, rho_branch, constants };
        p.check_range()?;
        Ok(p)
    }

    /// The search family: `s = C·s̃·log n` and `α` from its formula.
    pub fn from_s_tilde(log_n: f64, log_s_tilde: f64, constants: CalibrationConstants) -> Result<Self> {
        let log_s = ln(constants.s_ratio.value) + log_s_tilde + ln(log_n);
        let log_alpha = alpha_formula(log_n, log_s_tilde, &constants);
        Self::with_values(log_n, log_s, log_s_tilde, log_alpha, constants)
    }

    pub fn log_m(&self) -> f64 {
        3.0 * self.log_n
    }

    pub fn log_eps(&self) -> f64 {
        -3.0 * self.log_n
    }

    fn check_range(&self) -> Result<()> {
        let vals = [self.log_s, self.log_s_tilde, self.log_tau, self.log_alpha, self.log_rho];
        if vals.iter().all(|v| v.is_finite() && v.abs() < 1e300) {
            Ok(())
        } else {
            Err(Error::NonFinite(vals.iter().position(|v| !v.is_finite()).unwrap_or(0)))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintStatus {
    pub name: String,
    pub satisfied: bool,
    /// `log(rhs) − log(lhs)`; negative means violated.
    pub slack: f64,
}

/// Every constraint as `log rhs − log lhs`. Slacks within rounding of zero
/// (constraints that hold with equality by construction) are reported as 0.
pub fn constraint_check(p: &ParameterSet) -> Vec<ConstraintStatus> {
    let c = &p.constants;
    let l = p.log_n;
    let ll = ln(l);
    let (s, st, tau, alpha, rho) = (p.log_s, p.log_s_tilde, p.log_tau, p.log_alpha, p.log_rho);
    let raw = [
        ("n >= s", l - s),
        ("s >= 4 s_tilde", s - ln(4.0) - st),
        ("s_tilde >= log^2 n", st - 2.0 * ll),
        ("s >= C s_tilde log n", s - (ln(c.s_ratio.value) + st + ll)),
        ("s_tilde^2 alpha / n >= C_p2 log n", 2.0 * st + alpha - l - ln(c.e1_union.value) - ll),
        ("tau^2 s_tilde^2 alpha / n >= C_p1 log^2 n", 2.0 * tau + 2.0 * st + alpha - l - ln(c.e2_union.value) - 2.0 * ll),
        ("tau^2 s_tilde / n >= C_p1 log^2 n", 2.0 * tau + st - l - ln(c.e2_union.value) - 2.0 * ll),
        (
            "4 C_span rho sqrt(2 s) <= c_tilt n",
            l + ln(c.tilt_decay.value) - ln(4.0) - ln(c.span_threshold.value) - rho - 0.5 * (LN_2 + s),
        ),
        ("n^2 rho tau sqrt(alpha) / s_tilde^(5/2) <= c", ln(c.tail_sum.value) - (2.0 * l + rho + tau + 0.5 * alpha - 2.5 * st)),
        ("alpha <= 1/2", -LN_2 - alpha),
        ("rho <= n", l - rho),
        ("tau >= C_span", tau - ln(c.span_threshold.value)),
    ];
    let snap = 1e-12 * l.max(1.0);
    raw.iter()
        .map(|&(name, slack)| {
            let slack = if slack.abs() <= snap { 0.0 } else { slack };
            ConstraintStatus { name: name.into(), satisfied: slack >= 0.0, slack }
        })
        .collect()
}

/// How `check_tail_sums` obtained its numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TailMethod {
    /// Term-by-term log-domain summation (integer `n <= 10⁶`).
    Exact,
    /// Each sum bounded by `1/n` through its sufficient condition.
    SufficientConditions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailSums {
    pub log_sum1: f64,
    pub log_sum2: f64,
    pub log_total: f64,
    pub ok: bool,
    pub method: TailMethod,
}

/// Largest `log n` summed term by term.
pub const EXACT_TAIL_LOG_N: f64 = 13.815_510_557_964_274; // ln 10⁶

/// `log` of the `j = n − p` term of the first sum:
/// `C(n, j)² (8eρτ√(αj)/j)^{(1−δ)j}`.
pub fn tail_sum1_log_term(p: &ParameterSet, n: f64, j: f64) -> f64 {
    let base = ln(8.0 * core::f64::consts::E) + p.log_rho + p.log_tau + 0.5 * p.log_alpha - 0.5 * ln(j);
    2.0 * ln_binomial(n, j) + (1.0 - p.delta) * j * base
}

/// Evaluates both binomial tail sums; `ok` iff their total is at most 1/2.
///
/// The first sum runs over `j = n − p > s̃`, the second over `j <= s̃`, so
/// the two ranges cover every `p` for non-integer `s̃` too.
pub fn check_tail_sums(p: &ParameterSet) -> TailSums {
    if p.log_n > EXACT_TAIL_LOG_N + 1e-9 {
        let holds = constraint_check(p)
            .iter()
            .filter(|c| c.name.starts_with("s >= C") || c.name.starts_with("n^2 rho"))
            .all(|c| c.satisfied);
        let each = -p.log_n;
        let total = LN_2 + each;
        return TailSums { log_sum1: each, log_sum2: each, log_total: total, ok: holds && total <= -LN_2, method: TailMethod::SufficientConditions };
    }
    let n = libm::round(libm::exp(p.log_n));
    let split = libm::floor(libm::exp(p.log_s_tilde)).min(n);
    let s = libm::exp(p.log_s);
    let c_tilt = p.constants.tilt_decay.value;
    let log_sum1 = log_sum_exp(((split as u64 + 1)..=(n as u64)).map(|j| tail_sum1_log_term(p, n, j as f64)));
    let log_sum2 = LN_2 + log_sum_exp((0..=(split as u64)).map(|j| 2.0 * ln_binomial(n, j as f64) - c_tilt * s));
    let log_total = log_add_exp(log_sum1, log_sum2);
    TailSums { log_sum1, log_sum2, log_total, ok: log_total <= -LN_2, method: TailMethod::Exact }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximizes `ρ` over `log s̃`, with `s = C·s̃·log n` and `α` from its
/// formula. `ρ` is a minimum of affine functions of `log s̃` there, hence
/// unimodal, and golden-section search finds the peak.
pub fn feasible_parameters(log_n: f64, constants: &CalibrationConstants) -> Result<ParameterSet> {
    constants.validate()?;
    if !(log_n >= ln(16.0)) || !log_n.is_finite() {
        return Err(Error::InvalidParameters(alloc::format!("need log n >= log 16, got {log_n}")));
    }
    let c = constants;
    let ll = ln(log_n);
    if ln(c.s_ratio.value) + ll < ln(4.0) {
        return Err(Error::Infeasible("s >= 4 s_tilde".into()));
    }
    if c.alpha_scale.value < c.e1_union.value {
        return Err(Error::Infeasible("s_tilde^2 alpha / n >= C_p2 log n".into()));
    }
    let lower = [
        (2.0 * ll, "s_tilde >= log^2 n"),
        (0.5 * (ln(2.0 * c.alpha_scale.value) + log_n + ll), "alpha <= 1/2"),
    ];
    let (lo, lo_name) = lower.iter().copied().fold((f64::NEG_INFINITY, ""), |a, b| if b.0 > a.0 { b } else { a });
    let hi = log_n - ln(c.s_ratio.value) - ll;
    if lo > hi {
        return Err(Error::Infeasible(lo_name.into()));
    }
    let value = |x: f64| ParameterSet::from_s_tilde(log_n, x, *c).map(|p| p.log_rho);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (value(x1)?, value(x2)?);
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = value(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = value(x1)?;
        }
    }
    let mut best = (0.5 * (a + b), value(0.5 * (a + b))?);
    for x in [lo, hi] {
        let v = value(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    let p = ParameterSet::from_s_tilde(log_n, best.0, *c)?;
    if let Some(bad) = constraint_check(&p).into_iter().filter(|s| !s.satisfied).min_by(|a, b| a.slack.total_cmp(&b.slack)) {
        return Err(Error::Infeasible(bad.name));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitPoint {
    pub log_n: f64,
    pub log_rho: f64,
    pub log_s_tilde: f64,
    /// Finite-difference slope of `log ρ*` against `log n` at this point.
    pub rho_slope: f64,
    pub s_tilde_slope: f64,
    /// `log s̃ / log n`.
    pub s_tilde_ratio: f64,
    pub rho_branch: RhoBranch,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentFit {
    /// Slope of `log ρ*` over the last interval.
    pub slope: f64,
    /// Slope of `log s̃*` over the last interval.
    pub s_tilde_slope: f64,
    pub points: Vec<FitPoint>,
}

/// Finite-difference exponents of `ρ*(n)` and `s̃*(n)`. Each point uses the
/// backward difference (the first point the forward one).
pub fn exponent_fit(log_n_list: &[f64], constants: &CalibrationConstants) -> Result<ExponentFit> {
    if log_n_list.len() < 2 {
        return Err(Error::InvalidParameters("exponent fit needs at least two log n values".into()));
    }
    if log_n_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameters("log n values must be strictly increasing".into()));
    }
    let sets: Vec<ParameterSet> = log_n_list.iter().map(|&l| feasible_parameters(l, constants)).collect::<Result<_>>()?;
    let diff = |i: usize, j: usize, f: fn(&ParameterSet) -> f64| (f(&sets[j]) - f(&sets[i])) / (sets[j].log_n - sets[i].log_n);
    let points: Vec<FitPoint> = (0..sets.len())
        .map(|k| {
            let (i, j) = if k == 0 { (0, 1) } else { (k - 1, k) };
            FitPoint {
                log_n: sets[k].log_n,
                log_rho: sets[k].log_rho,
                log_s_tilde: sets[k].log_s_tilde,
                rho_slope: diff(i, j, |p| p.log_rho),
                s_tilde_slope: diff(i, j, |p| p.log_s_tilde),
                s_tilde_ratio: sets[k].log_s_tilde / sets[k].log_n,
                rho_branch: sets[k].rho_branch,
            }
        })
        .collect();
    let last = points.last().expect("two or more points");
    Ok(ExponentFit { slope: last.rho_slope, s_tilde_slope: last.s_tilde_slope, points })
}

/// `d log ρ* / d log c` for every constant, by central differences of ±1%.
pub fn constant_sensitivity(log_n: f64, constants: &CalibrationConstants) -> Result<Vec<(&'static str, f64)>> {
    let h = 0.01f64;
    let mut out = Vec::new();
    for (idx, (name, _)) in constants.entries().iter().enumerate() {
        let bump = |factor: f64| {
            let mut c = *constants;
            let field = match idx {
                0 => &mut c.span_lower,
                1 => &mut c.span_threshold,
                2 => &mut c.tilt_decay,
                3 => &mut c.e2_union,
                4 => &mut c.e1_union,
                5 => &mut c.rho_scale,
                6 => &mut c.alpha_scale,
                7 => &mut c.s_ratio,
                _ => &mut c.tail_sum,
            };
            field.value *= factor;
            feasible_parameters(log_n, &c).map(|p| p.log_rho)
        };
        let (up, down) = (bump(1.0 + h), bump(1.0 / (1.0 + h)));
        let d = match (up, down) {
            (Ok(u), Ok(d)) => (u - d) / (2.0 * libm::log1p(h)),
            _ => f64::NAN,
        };
        out.push((*name, d));
    }
    Ok(out)
}
