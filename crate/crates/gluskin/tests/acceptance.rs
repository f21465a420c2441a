//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs under `cargo test` (harness disabled).

use std::process::Command;
use std::time::Instant;

use gluskin::experiments::*;
use gluskin::parallel::gaussian_measure_par;
use gluskin_core::lp::l1_membership_scale;
use gluskin_core::measure::{l1_ball_measure_oracle, CalibrationConstants};
use gluskin_core::optimizer::{check_tail_sums, exponent_fit, feasible_parameters};
use gluskin_core::polytope::CrossPolytope;
use gluskin_core::rng::GaussianStream;
use gluskin_core::{Seed, Vector};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c() -> CalibrationConstants {
    CalibrationConstants::default()
}

/// `h` with `γ_n(h·B_1^n) = target`, by bisection on the oracle.
fn h_for(n: usize, target: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6, 100.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if l1_ball_measure_oracle(n, mid).unwrap() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn measure_oracle() -> Outcome {
    let start = Instant::now();
    let mut report = Vec::new();
    let mut ok = true;
    for (i, n) in [1usize, 2, 4, 8].into_iter().enumerate() {
        let h = h_for(n, 0.2);
        let oracle = l1_ball_measure_oracle(n, h).unwrap();
        assert!((0.01..=0.5).contains(&oracle));
        let body = CrossPolytope::standard(n);
        let hits = (0..100u64)
            .filter(|&s| {
                let e = gaussian_measure_par(&body, h, 100_000, Seed::with_stream(s, i as u64)).unwrap();
                e.ci_low <= oracle && oracle <= e.ci_high
            })
            .count();
        ok &= hits >= 95;
        report.push(format!("n={n}: {hits}/100"));
    }
    let secs = start.elapsed().as_secs_f64();
    check(ok && secs <= 60.0, format!("{} in {secs:.1}s", report.join(", ")))
}

fn simple_bound() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for r in [4usize, 6] {
        for h in [0.25, 0.5] {
            let rec = run_simple_bound_experiment(8, r, h, 50, 100_000, Seed::new(r as u64), &c()).unwrap();
            ok &= rec.passed;
            report.push(format!("r={r} h={h}: {} violations", rec.details["violations"]));
        }
    }
    check(ok, report.join(", "))
}

fn crosspol2() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for delta in [0.25, 0.5] {
        for k in [4usize, 8] {
            for h in [0.25, 0.5] {
                let rec = run_crosspol2_experiment(8, k, h, delta, 50, 100_000, Seed::new(k as u64), &c()).unwrap();
                ok &= rec.passed;
                report.push(format!("δ={delta} k={k} h={h}: {}", rec.details["violations"]));
            }
        }
    }
    check(ok, format!("violations {}", report.join(", ")))
}

fn tilt_decay() -> Outcome {
    let base = c();
    let ct = base.tilt_decay.value;
    let out = calibrate_tilt_constant(&[16], &[4, 8, 12], 6.0, 100_000, Seed::new(4), &base).unwrap();
    let slope = out.slopes[0].1;
    let dominated = out.points.iter().all(|p| 2.0 * (-ct * p.k as f64).exp() >= p.ci_high);
    check(slope <= -ct && dominated, format!("c_tilt={ct}, slope {slope:.4}, fitted {:.4}, dominance {dominated}", out.fitted))
}

fn symmetrization() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for n in [2usize, 3] {
        let rec = run_symmetrization_experiment(n, 50, 100_000, Seed::new(n as u64), &c()).unwrap();
        ok &= rec.passed;
        report.push(format!("n={n}: {} violations", rec.details["violations"]));
    }
    check(ok, report.join(", "))
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimum over all bases of `|X_S^{-1} x|_1`: the ℓ1 LP attains its optimum
/// at a basic solution.
fn basis_enumeration(x: &[f64], gens: &[Vec<f64>]) -> f64 {
    let (n, m) = (x.len(), gens.len());
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let cols: Vec<&Vec<f64>> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &gens[i]).collect();
        let a: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|g| g[r]).collect()).collect();
        if let Some(l) = gauss_solve(a, x.to_vec()) {
            best = best.min(l.iter().map(|v| v.abs()).sum());
        }
    }
    best
}

fn draw(stream: &mut GaussianStream, n: usize) -> Vec<f64> {
    (0..n).map(|_| stream.next_gaussian()).collect()
}

fn lp_correctness() -> Outcome {
    let mut stream = GaussianStream::new(Seed::new(6));
    let mut worst_enum: f64 = 0.0;
    for _ in 0..200 {
        let m = 3 + stream.next_below(4) as usize;
        let gens: Vec<Vec<f64>> = (0..m).map(|_| draw(&mut stream, 3)).collect();
        let x = draw(&mut stream, 3);
        let got = l1_membership_scale(&Vector::new(x.clone()).unwrap(), &gens.iter().map(|g| Vector::new(g.clone()).unwrap()).collect::<Vec<_>>()).unwrap();
        worst_enum = worst_enum.max((got.scale - basis_enumeration(&x, &gens)).abs());
    }
    let mut worst_basis: f64 = 0.0;
    for _ in 0..200 {
        let n = 1 + stream.next_below(20) as usize;
        let gens: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut stream, n)).collect();
        let x = draw(&mut stream, n);
        let a: Vec<Vec<f64>> = (0..n).map(|r| gens.iter().map(|g| g[r]).collect()).collect();
        let want: f64 = gauss_solve(a, x.clone()).unwrap().iter().map(|v| v.abs()).sum();
        let got = l1_membership_scale(&Vector::new(x).unwrap(), &gens.iter().map(|g| Vector::new(g.clone()).unwrap()).collect::<Vec<_>>()).unwrap();
        worst_basis = worst_basis.max((got.scale - want).abs());
    }
    check(worst_enum <= 1e-9 && worst_basis <= 1e-9, format!("max error: enumeration {worst_enum:.2e}, basis {worst_basis:.2e}"))
}

fn exponent_recovery() -> Outcome {
    let start = Instant::now();
    let fit = exponent_fit(&[100.0, 1000.0, 5000.0, 1e4], &c()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (fit.slope - 5.0 / 9.0).abs() <= 0.01 && (fit.s_tilde_slope - 8.0 / 9.0).abs() <= 0.01 && secs <= 5.0;
    check(ok, format!("rho slope {:.5} (5/9 = {:.5}), s_tilde slope {:.5} (8/9 = {:.5}), {secs:.3}s", fit.slope, 5.0 / 9.0, fit.s_tilde_slope, 8.0 / 9.0))
}

fn tail_sums() -> Outcome {
    let p = match feasible_parameters(1e4f64.ln(), &c()) {
        Ok(p) => p,
        Err(e) => return Err(format!("no feasible parameters: {e}")),
    };
    let t = check_tail_sums(&p);
    let total = t.log_total.exp();
    check(t.ok && total <= 0.5, format!("{:?}: total {total:.3e}, slack {:.3e}", t.method, 0.5 - total))
}

fn discretization() -> Outcome {
    let start = Instant::now();
    let n = 20usize;
    let cfg = Discretization { n, m: 8000, eps: (n as f64).powi(-3), rho: (n as f64).sqrt(), trials: 100, seed: Seed::new(9) };
    let rec = run_discretization_slack(&cfg, &c()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(rec.empirical_rate >= 0.99 && secs <= 180.0, format!("rate {} over {} trials, {secs:.1}s", rec.empirical_rate, rec.trials))
}

fn span_distance() -> Outcome {
    let cfg = SpanDistance::identity(60, 40, 10, 10.0, 0.5, 200, Seed::new(10));
    let rec = run_span_distance_experiment(&cfg, &c()).unwrap();
    check(rec.empirical_rate >= 0.99, format!("rate {} over {} trials", rec.empirical_rate, rec.trials))
}

fn decomposition() -> Outcome {
    let rec = run_decomposition_experiment(6, 60, 1000, Seed::new(11), &c()).unwrap();
    check(rec.passed, format!("{} of {} instances clean", (rec.empirical_rate * rec.trials as f64).round(), rec.trials))
}

fn run_cli(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_gluskin")).args(args).output().expect("binary runs");
    out.status.code().unwrap_or(-1)
}

fn replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let experiments: &[&[&str]] = &[
        &["sample", "--n", "4", "--m", "16", "--directions", "50", "--bm", "--restarts", "2", "--iters", "4"],
        &["measure", "--family", "l1ball", "--n", "4", "--h", "1.5", "--samples", "20000"],
        &["measure", "--family", "gluskin", "--n", "3", "--m", "9", "--samples", "5000"],
        &["measure", "--family", "tilt", "--n", "8", "--k", "3", "--samples", "20000"],
        &["verify-lemma", "--name", "span-distance", "--trials", "40"],
        &["verify-lemma", "--name", "discretization", "--n", "8", "--trials", "10"],
        &["verify-lemma", "--name", "event-e1", "--trials", "30"],
        &["verify-lemma", "--name", "event-e2", "--trials", "30"],
        &["verify-lemma", "--name", "simple-bound", "--trials", "5", "--samples", "5000"],
        &["verify-lemma", "--name", "crosspol2", "--trials", "5", "--samples", "5000"],
        &["verify-lemma", "--name", "symmetrization", "--trials", "5", "--samples", "5000"],
        &["verify-lemma", "--name", "decomposition", "--trials", "50"],
        &["optimize", "--log-n", "100"],
        &["optimize", "--log-n", "100", "--sweep", "10"],
        &["pipeline", "--n", "4", "--matrices", "2", "--samples", "2000"],
        &["calibrate", "--samples", "20000"],
    ];
    let mut failures = Vec::new();
    for (i, args) in experiments.iter().enumerate() {
        let record = |threads: &str| dir.path().join(format!("{i}-t{threads}.json"));
        let mut bytes = Vec::new();
        for threads in ["1", "3"] {
            let path = record(threads);
            let mut full = vec!["--threads", threads];
            full.extend_from_slice(args);
            full.extend(["--seed", "5", "--no-timing", "--output", path.to_str().unwrap()]);
            if run_cli(&full) == 2 {
                failures.push(format!("{} rejected", args[0]));
            }
            bytes.push(std::fs::read(&path).unwrap_or_default());
        }
        let replayed = run_cli(&["--threads", "3", "replay", record("1").to_str().unwrap()]) == 0;
        if bytes[0].is_empty() || bytes[0] != bytes[1] || !replayed {
            failures.push(format!("{}", args.join(" ")));
        }
    }
    check(failures.is_empty(), format!("{} experiments, mismatches: [{}]", experiments.len(), failures.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("measure-oracle agreement", measure_oracle),
        ("simple distance bound", simple_bound),
        ("crosspol2 bound", crosspol2),
        ("tilt decay", tilt_decay),
        ("symmetrization", symmetrization),
        ("LP correctness", lp_correctness),
        ("exponent recovery", exponent_recovery),
        ("tail sums", tail_sums),
        ("discretization slack", discretization),
        ("span-distance concentration", span_distance),
        ("decomposition identities", decomposition),
        ("deterministic replay", replay),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, msg) = match f() {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("{tag} {:>2} {name}: {msg} [{:.1}s]", i + 1, start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
